#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace lingrow {

// Exponent inputs for the per-theorem admissibility checks.  mu = max{mu1,
// mu2} is always derived, never stored.
struct ExponentSet {
  std::optional<double> mu1;
  std::optional<double> mu2;
  std::optional<double> kappa;     // two-sided non-splitting upper exponent
  std::optional<double> varkappa;  // growth allowance on f1''
  std::optional<double> gamma;     // growth allowance on f2''
  std::optional<double> chi;       // target integrability exponent
};

// Bookkeeping derived from chi and mu1: s = chi/2 - 1, eps_hat = 1 - mu1/2,
// alpha = s - eps_hat/2.  The bootstrap inequality compares the Gamma_1
// moment of order s+1 against the one of order s + (2+mu1)/4; the latter
// exponent follows from 2s - alpha + mu1/2 with the definitions above (a
// closing remark in the source derivation prints (2+mu1)/2 instead, which is
// an arithmetic slip; the /4 value is what the inequality states and what we
// implement).
struct MomentBookkeeping {
  double s = 0.0;
  double eps_hat = 0.0;
  double alpha = 0.0;
  double bootstrap_exponent = 0.0;  // s + (2+mu1)/4

  static MomentBookkeeping from(double chi, double mu1) {
    if (!(chi > 2.0)) throw std::invalid_argument("chi > 2 required");
    if (!(mu1 > 1.0 && mu1 < 2.0))
      throw std::invalid_argument("bookkeeping needs 1 < mu1 < 2");
    MomentBookkeeping b;
    b.s = 0.5 * chi - 1.0;
    b.eps_hat = 1.0 - 0.5 * mu1;
    b.alpha = b.s - 0.5 * b.eps_hat;
    b.bootstrap_exponent = b.s + 0.25 * (2.0 + mu1);
    return b;
  }
};

// Witness pair for the negative-exponent route: s = -1/2 + tau_s,
// alpha = -1/2 + tau_alpha, subject to
//   (i)   tau_alpha < tau_s
//   (ii)  gamma < 2 (tau_s - tau_alpha) / (1 + 2 tau_s)
//   (iii) tau_s - tau_alpha < 1 - mu1/2
struct TauWitness {
  double tau_s = 0.0;
  double tau_alpha = 0.0;
  bool cond_order = false;
  bool cond_gamma = false;
  bool cond_gap = false;

  bool all() const { return cond_order && cond_gamma && cond_gap; }

  static TauWitness check(double tau_s, double tau_alpha, double mu1,
                          double gamma) {
    TauWitness w;
    w.tau_s = tau_s;
    w.tau_alpha = tau_alpha;
    w.cond_order = tau_alpha < tau_s;
    w.cond_gamma = gamma < 2.0 * (tau_s - tau_alpha) / (1.0 + 2.0 * tau_s);
    w.cond_gap = tau_s - tau_alpha < 1.0 - 0.5 * mu1;
    return w;
  }
};

struct AdmissibilityReport {
  std::optional<bool> thm_splitting;        // mu1 < 2 route
  std::optional<bool> cor_uniqueness;       // max{mu1, mu2} < 2
  std::optional<bool> cor_two_sided;        // mu < 2 + kappa
  std::optional<bool> cor_unbounded_first;  // varkappa < 2 - mu1
  std::optional<bool> thm_gamma;            // gamma < (2-mu1)/(1+(2-mu1))
  std::optional<MomentBookkeeping> bookkeeping;
  std::optional<TauWitness> witness;
  // alpha window (4.4)-(4.5) for the two-sided route at the given chi.
  std::optional<std::pair<double, double>> alpha_window;
  std::string note;

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* k, const std::optional<bool>& v) {
      if (v) j[k] = *v;
    };
    put("thm_splitting", thm_splitting);
    put("cor_uniqueness", cor_uniqueness);
    put("cor_two_sided", cor_two_sided);
    put("cor_unbounded_first", cor_unbounded_first);
    put("thm_gamma", thm_gamma);
    if (bookkeeping)
      j["bookkeeping"] = {{"s", bookkeeping->s},
                          {"eps_hat", bookkeeping->eps_hat},
                          {"alpha", bookkeeping->alpha},
                          {"bootstrap_exponent", bookkeeping->bootstrap_exponent}};
    if (witness)
      j["witness"] = {{"tau_s", witness->tau_s},
                      {"tau_alpha", witness->tau_alpha},
                      {"satisfies_all", witness->all()}};
    if (alpha_window) j["alpha_window"] = {alpha_window->first, alpha_window->second};
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

// Witness recipe following the proof: push tau_s toward its ceiling
// 1 - mu1/2 far enough that tau_alpha > 0 with
// tau_alpha < tau_s - gamma (1 + 2 tau_s) / 2 remains available, then take
// tau_alpha as half that headroom.  A fixed fraction like tau_s = 0.9 *
// (1 - mu1/2) is not enough: gammas close to the admissible bound
// 2e/(1+2e), e = 1 - mu1/2, need tau_s arbitrarily close to e.
inline TauWitness gamma_route_witness(double mu1, double gamma) {
  const double eps_hat = 1.0 - 0.5 * mu1;
  const double gamma_max = 2.0 * eps_hat / (1.0 + 2.0 * eps_hat);
  const double headroom_at_cap =
      0.5 * (1.0 + 2.0 * eps_hat) * (gamma_max - gamma);
  const double shrink =
      std::min(1e-3, 0.5 * headroom_at_cap / (eps_hat * (1.0 - gamma)));
  const double tau_s = eps_hat * (1.0 - shrink);
  const double headroom = tau_s * (1.0 - gamma) - 0.5 * gamma;
  const double tau_alpha = std::min(0.5 * tau_s, 0.5 * headroom);
  return TauWitness::check(tau_s, tau_alpha, mu1, gamma);
}

inline AdmissibilityReport exponent_admissibility(const ExponentSet& e) {
  AdmissibilityReport rep;
  auto require_gt1 = [](double v, const char* name) {
    if (!(v > 1.0))
      throw std::invalid_argument(std::string(name) + " > 1 required");
  };

  if (e.mu1) {
    require_gt1(*e.mu1, "mu1");
    if (e.mu2) require_gt1(*e.mu2, "mu2");
    rep.thm_splitting = *e.mu1 < 2.0;
  }
  if (e.mu1 && e.mu2)
    rep.cor_uniqueness = std::max(*e.mu1, *e.mu2) < 2.0;

  if (e.mu1 && e.kappa) {
    const double mu = *e.mu1;  // non-splitting route: a single mu
    const double kappa = *e.kappa;
    if (!(kappa > -1.0 && kappa <= 1.0))
      throw std::invalid_argument("kappa in (-1, 1] required");
    rep.cor_two_sided = mu < 2.0 + kappa;
    if (e.chi && *e.chi > 2.0) {
      const double s = 0.5 * *e.chi - 1.0;
      // alpha < s + kappa/2  and  s < alpha + (2 - mu)/2
      rep.alpha_window = {s - 0.5 * (2.0 - mu), s + 0.5 * kappa};
    }
  }

  if (e.mu1 && e.varkappa) {
    if (!(*e.varkappa >= 0.0))
      throw std::invalid_argument("varkappa >= 0 required");
    rep.cor_unbounded_first = *e.varkappa < 2.0 - *e.mu1;
  }

  if (e.mu1 && e.gamma) {
    if (!(*e.gamma >= 0.0)) throw std::invalid_argument("gamma >= 0 required");
    const double gap = 2.0 - *e.mu1;
    const bool ok = *e.mu1 < 2.0 && *e.gamma < gap / (1.0 + gap);
    rep.thm_gamma = ok;
    if (ok) rep.witness = gamma_route_witness(*e.mu1, *e.gamma);
  }

  if (e.chi && e.mu1 && *e.mu1 < 2.0 && *e.chi > 2.0)
    rep.bookkeeping = MomentBookkeeping::from(*e.chi, *e.mu1);

  return rep;
}

} // namespace lingrow
