// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances and envelopes are fixed here, not tuned at runtime.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dgfem/experiment.hpp"
#include "dgfem/study.hpp"
#include "nvb_oracle.hpp"

using namespace dgfem;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool criterion_local_stiffness(std::string& detail) {
  const SimplexPoints<2> tri = {{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
  const auto k = local_stiffness<2>(tri, identity_matrix<2>());
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(k[size_t(i)][size_t(j)] - expect[i][j]));
  detail = "max deviation " + format_double(worst);
  return worst <= 1e-12;
}

bool criterion_convergence(std::string& detail) {
  const auto study = convergence_order_study(manufactured_polynomial(), 2, 6);
  detail = "orders";
  for (double o : study.orders) detail += " " + format_double(o).substr(0, 6);
  return study.min_order >= 1.9;
}

bool criterion_max_principle(std::string& detail) {
  Rng rng(7);
  const auto study = max_principle_study(rng);
  detail = "min nodal value " + format_double(study.min_nodal) + " over " +
           std::to_string(study.meshes_checked) + " meshes";
  return study.all_nonobtuse && study.min_nodal >= -1e-10;
}

bool criterion_lemma_battery(std::string& detail) {
  const auto battery = run_lemma_battery(2024, 1000);
  detail = "violations: jensen " + std::to_string(battery.jensen_violations) + ", weak-type " +
           std::to_string(battery.weak_type_violations) + ", shift " +
           std::to_string(battery.shift_identity_violations) + ", rearrange " +
           std::to_string(battery.prod_rearrange_violations) + ", geometric " +
           std::to_string(battery.fast_geometric_violations) + ", telescoping " +
           std::to_string(battery.telescoping_violations);
  return battery.pass();
}

bool criterion_nodal_max(std::string& detail) {
  const auto trials = nodal_max_trials(2025, 100);
  detail = "worst relative residual " + format_double(trials.worst_relative_residual);
  return trials.pass() && trials.worst_relative_residual <= 1e-10;
}

bool criterion_caccioppoli(std::string& detail) {
  const auto study = graded_ratio_study(5.0, 6);
  detail = "ratios";
  for (double r : study.caccioppoli_ratios) detail += " " + format_double(r).substr(0, 9);
  double head = 0.0;
  for (std::size_t i = 0; i < 3 && i < study.caccioppoli_ratios.size(); ++i)
    head = std::max(head, study.caccioppoli_ratios[i]);
  return head > 0.0 && uniformity_envelope(study.caccioppoli_ratios, 3);
}

bool criterion_poincare(std::string& detail) {
  const auto study = graded_ratio_study(5.0, 6);
  detail = "ratios";
  for (double r : study.poincare_ratios) detail += " " + format_double(r).substr(0, 9);
  for (double g : study.gammas)
    if (g < 0.25) {
      detail += " (hypothesis fraction " + format_double(g) + " below 0.25)";
      return false;
    }
  double head = 0.0;
  for (std::size_t i = 0; i < 3 && i < study.poincare_ratios.size(); ++i)
    head = std::max(head, study.poincare_ratios[i]);
  return head > 0.0 && uniformity_envelope(study.poincare_ratios, 3);
}

bool criterion_holder(std::string& detail) {
  const double ratio = kellogg_ratio_for_exponent(0.5);
  bool ok = true;
  detail.clear();
  for (bool adaptive : {false, true}) {
    const auto fam = checkerboard_family_study(ratio, 4, 7, adaptive);
    const bool alpha_ok = fitted_alpha_ok(fam, 0.5, 0.2, 5);
    const bool semi_ok = seminorm_growth_ok(fam, 1.05);
    detail += fam.family + ": alpha_hat " + format_double(fam.alpha_hat).substr(0, 6) + " semis";
    for (const auto& lvl : fam.levels) detail += " " + format_double(lvl.seminorm).substr(0, 6);
    detail += alpha_ok ? "" : " [exponent out of band]";
    detail += semi_ok ? "" : " [seminorm growth]";
    detail += "; ";
    ok &= alpha_ok && semi_ok;
  }
  return ok;
}

bool criterion_nvb(std::string& detail) {
  auto m = kuhn_triangulate<2>(1, Box<2>{{0, 0}, {1, 1}});
  double max_gamma = shape_regularity(m).gamma;
  for (int round = 0; round < 10; ++round) {
    int target = -1;
    for (const auto& e : m.elements)
      if (contains_point<2>(m.points(e.id), Vec<2>{0.0, 0.0}, 1e-12)) {
        target = e.id;
        break;
      }
    if (target < 0) return false;
    m = bisect(m, {target});
    if (!validate_conformity(m).conforming()) {
      detail = "refinement lost conformity";
      return false;
    }
    max_gamma = std::max(max_gamma, shape_regularity(m).gamma);
  }
  const double oracle =
      nvb_oracle::max_gamma_over_similarity_classes<2>(kuhn_triangulate<2>(1, Box<2>{{0, 0}, {1, 1}}));
  detail = "graded max " + format_double(max_gamma) + " vs class bound " + format_double(oracle);
  return std::abs(max_gamma - oracle) <= 1e-10 * oracle;
}

bool criterion_quasilinear(std::string& detail) {
  const auto study = quasilinear_study(5, 8, 2026);
  bool growth_ok = true;
  for (std::size_t i = 0; i + 1 < study.seminorms.size(); ++i)
    growth_ok &= study.seminorms[i + 1] <= 1.05 * study.seminorms[i] + 1e-300;
  int max_iters = 0;
  for (int it : study.iterations) max_iters = std::max(max_iters, it);
  detail = "max iterations " + std::to_string(max_iters) + ", alpha " +
           format_double(study.alpha_hat).substr(0, 6) + ", audit failures " +
           std::to_string(study.truncation_audit_failures);
  return study.converged && max_iters <= 200 && study.truncation_audit_failures == 0 &&
         study.alpha_hat > 0.0 && growth_ok;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"local stiffness exactness", criterion_local_stiffness},
      {"manufactured convergence order >= 1.9", criterion_convergence},
      {"discrete maximum principle", criterion_max_principle},
      {"unconditional lemma battery (1000 trials each)", criterion_lemma_battery},
      {"nodal-max closure trials", criterion_nodal_max},
      {"energy-ratio uniformity envelope", criterion_caccioppoli},
      {"space Poincare uniformity envelope", criterion_poincare},
      {"Hoelder exponent and seminorm uniformity", criterion_holder},
      {"bisection shape-regularity class bound", criterion_nvb},
      {"quasilinear driver", criterion_quasilinear},
  };

  int failures = 0;
  int index = 0;
  const auto suite_start = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%s; %.1f s)\n", ok ? "PASS" : "FAIL", index,
                c.name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%d/%zu criteria passed (%.1f s total)\n", static_cast<int>(criteria.size()) - failures,
              criteria.size(), total);
  return failures == 0 ? 0 : 1;
}
