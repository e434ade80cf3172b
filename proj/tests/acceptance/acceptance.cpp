// Acceptance run: one PASS/FAIL line per criterion at full scale with the
// default thresholds. Exit status is nonzero when any criterion fails.

#include <bit>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "json.hpp"

#include "lagspec/cli.hpp"
#include "lagspec/ensembles.hpp"
#include "lagspec/experiments.hpp"
#include "lagspec/fixed_point.hpp"
#include "lagspec/geometry.hpp"
#include "lagspec/limit_law.hpp"
#include "lagspec/stats.hpp"

using namespace lagspec;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ExperimentConfig config_for(Eigen::Index n, Eigen::Index big_n, Eigen::Index k, std::uint64_t seed) {
  ExperimentConfig c;
  c.spec = EnsembleSpec::make(n, big_n, k, LawKind::ComplexGaussian, seed);
  return c;
}

std::vector<double> sorted_values(const RealVector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// Finite-n inequalities and identities.
Outcome finite_n_suite() {
  Outcome o;
  const std::vector<Complex> zs{1.0, Complex{0.0, 1.0}, -0.5};
  auto c = config_for(64, 64, 1, 20240101);
  c.trials = 100;
  c.k_values = {1, 5, 40};
  c.z_list = zs;
  const auto lin = linearization_sweep(c);
  o.require(lin.checks_run == 900 && lin.checks_failed == 0, "linearization");
  const auto rank = rank_perturbation_sweep(c);
  o.require(rank.checks_run == 300 && rank.checks_failed == 0, "rank-one interlacing");
  o.detail << " linearization " << lin.checks_run - lin.checks_failed << "/" << lin.checks_run
           << ", interlacing " << rank.checks_run - rank.checks_failed << "/" << rank.checks_run;

  double dilation_err = 0.0, det_err = 0.0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto spec = EnsembleSpec::make(64, 64, 1 + t % 5, LawKind::ComplexGaussian, 77);
    const ComplexMatrix y = build_autocov(sample_entry_matrix(spec, SeededTrial::make(77, t)), spec.k);
    for (const Complex z : zs) {
      const ComplexMatrix shifted = y - z * ComplexMatrix::Identity(64, 64);
      const RealVector s = singular_values(shifted).values;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(y, z), Eigen::EigenvaluesOnly);
      std::vector<double> expected;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        expected.push_back(s(i));
        expected.push_back(-s(i));
      }
      std::sort(expected.begin(), expected.end());
      const auto got = sorted_values(es.eigenvalues());
      for (std::size_t i = 0; i < got.size(); ++i) {
        dilation_err = std::max(dilation_err, std::abs(got[i] - expected[i]));
      }
      const EigenSpectrum e = eigenvalues(y);
      double lhs = 0.0, rhs = 0.0;
      for (Eigen::Index i = 0; i < 64; ++i) {
        lhs -= std::log(std::abs(e.values(i) - z)) / 64.0;
        rhs -= std::log(s(i)) / 64.0;
      }
      det_err = std::max(det_err, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
    }
  }
  o.require(dilation_err <= 1e-9, "dilation spectrum");
  o.require(det_err <= 1e-8, "determinant identity");
  o.detail << ", dilation err " << dilation_err << ", determinant rel err " << det_err;
  return o;
}

Outcome limit_law_suite() {
  Outcome o;
  double round_trip = 0.0, endpoint = 0.0, branch = 0.0, ks_max = 0.0;
  for (double g0 : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0}) {
    const Gamma0Law law(g0);
    endpoint = std::max(endpoint, std::abs(law.g(g0) - g0 * (g0 + 1.0)) / std::max(1.0, g0 * (g0 + 1.0)));
    for (int i = 0; i <= 500; ++i) {
      const double x = law.domain_lo() + (law.domain_hi() - law.domain_lo()) * i / 500.0;
      round_trip = std::max(round_trip, std::abs(law.g_inverse(law.g(x)) - x));
    }
    if (g0 > 1.0) {
      const double b = law.branch_radius();
      const double atom = 1.0 - 1.0 / g0;
      branch = std::max({branch, std::abs(law.radial_cdf(b * (1 - 1e-13)) - atom),
                         std::abs(law.radial_cdf(b * (1 + 1e-13)) - atom)});
    }
  }
  for (double g0 : {0.5, 1.0, 2.0}) {
    const Gamma0Law law(g0);
    std::vector<double> radii;
    for (const auto& p : sample_limit_law(g0, 100000, 4242)) radii.push_back(std::abs(p));
    ks_max = std::max(ks_max, ks_one_sample(radii, [&](double r) { return law.radial_cdf(r); },
                                            [&](double r) { return law.radial_cdf_left(r); }));
  }
  o.require(round_trip <= 1e-10, "g_inverse round trip");
  o.require(endpoint <= 1e-12, "g(gamma0)");
  o.require(branch <= 1e-10, "branch continuity");
  o.require(ks_max <= 0.01, "sampler KS");
  o.detail << " round trip " << round_trip << ", g(gamma0) err " << endpoint << ", branch err "
           << branch << ", sampler KS " << ks_max;
  return o;
}

Outcome esd_convergence() {
  Outcome o;
  auto c = config_for(512, 512, 1, 31337);
  c.trials = 5;
  c.n_values = {128, 512};
  c.lag_modes = {LagMode::One, LagMode::Log};
  const auto r = esd_experiment(c);
  o.require(r.checks.at("ks_max_one"), "mean KS at n = 512");
  o.require(r.checks.at("trend_one"), "KS decreases from 128 to 512");
  o.require(r.checks.at("lag_gap"), "log-lag gap");
  for (const auto& s : r.series) {
    o.detail << " " << to_string(s.mode) << "@" << s.n << " KS " << s.mean_ks;
  }
  for (const auto& w : r.warnings) o.detail << " warning: " << w;
  return o;
}

Outcome lsv_tail() {
  Outcome o;
  auto c = config_for(100, 100, 1, 9001);
  c.trials = 200;
  c.z_list = {1.0};
  const auto r = lsv_tail_experiment(c);
  const double freq = r.per_z.at(0).event_frequency;
  o.require(freq <= c.threshold("lsv_event_frequency_max"), "event frequency");
  o.detail << " threshold " << r.threshold << ", event frequency " << freq << ", min s "
           << r.per_z.at(0).min_s;
  return o;
}

Outcome fixed_point_regime() {
  Outcome o;
  auto c = config_for(400, 400, 200, 5150);
  c.trials = 10;
  c.z_list = {0.5, 1.0, Complex{1.0, 1.0}};
  c.t_list = {0.3, 0.5, 1.0};
  c.n_values = {256, 512};
  const auto r = large_k_experiment(c);
  double worst = 0.0, residual = 0.0;
  for (const auto& row : r.resolvent) {
    worst = std::max(worst, row.abs_error);
    residual = std::max(residual, row.solution.residual);
  }
  o.require(r.resolvent.size() == 9 && r.checks.at("resolvent_match"), "resolvent match");
  o.require(r.checks.at("solver_residual"), "solver residual");
  o.require(r.checks.at("esd_stability"), "ESD stability");

  double asymptote = 0.0;
  for (const Complex z : c.z_list) {
    const double t = 20.0;
    const auto sol = solve_s({z, t, 1.0, 0.5});
    const double expected = t / (t * t + std::norm(z));
    asymptote = std::max(asymptote, std::abs(sol.s - expected) / expected);
  }
  o.require(asymptote <= 0.05, "large-t asymptote");

  auto atoms = config_for(200, 400, 100, 6060);
  atoms.trials = 3;
  atoms.z_list = {1.0};
  atoms.t_list = {1.0};
  const auto a = large_k_experiment(atoms);
  o.require(a.checks.at("atom_at_zero"), "atom at zero");
  o.detail << " max |error| " << worst << ", residual " << residual << ", stability KS "
           << r.stability_ks << ", asymptote rel err " << asymptote << ", atoms " << a.min_atom_count
           << "/" << a.required_atom_count;
  return o;
}

double exhaustive_distance(const ComplexVector& u, Eigen::Index m) {
  const Eigen::Index n = u.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) > m) continue;
    ComplexVector v = ComplexVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) v(i) = u(i);
    }
    const double norm = v.norm();
    best = std::min(best, norm == 0.0 ? std::sqrt(2.0) : (u - v / norm).norm());
  }
  return best;
}

Outcome geometry_suite() {
  Outcome o;
  Rng rng(8080);
  double oracle_err = 0.0;
  for (Eigen::Index n = 4; n <= 8; ++n) {
    for (double theta : {0.25, 0.5}) {
      const auto m = static_cast<Eigen::Index>(std::floor(theta * n));
      for (int trial = 0; trial < 200; ++trial) {
        const UnitVector u = UnitVector::random(n, rng);
        oracle_err = std::max(oracle_err, std::abs(compressibility_distance(u, theta) -
                                                   exhaustive_distance(u.coords(), m)));
      }
    }
  }
  o.require(oracle_err <= 1e-12, "exhaustive-support oracle");

  const CompressibilityParams p{0.1, 0.1};
  int ok_j = 0, ok_jp = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const UnitVector u = sample_incompressible(64, p, rng);
    const UnitVector ut = UnitVector::random(64, rng);
    ok_j += static_cast<double>(spread_set(u, p).indices.size()) >= 0.75 * p.theta * 64;
    ok_jp += static_cast<double>(joint_spread_set(u, ut, p).indices.size()) >= 0.5 * p.theta * 64;
  }
  o.require(ok_j == 1000, "|J| bound");
  o.require(ok_jp == 1000, "|J'| bound");

  // Sums of m standard complex Gaussians against c r / sigma + c L3 / sigma^3 with c = 4.
  const double third = 3.0 * std::sqrt(std::numbers::pi) / 4.0;
  int small_ball_ok = 0, small_ball_total = 0;
  for (int m : {1, 4, 16, 64}) {
    std::vector<Complex> sums;
    for (int i = 0; i < 5000; ++i) {
      Complex s{};
      for (int j = 0; j < m; ++j) {
        const auto [a, b] = rng.normal_pair();
        s += Complex{a, b} / std::sqrt(2.0);
      }
      sums.push_back(s);
    }
    for (double r : {0.1, 0.3, 1.0, 3.0}) {
      ++small_ball_total;
      small_ball_ok += small_ball_estimate(sums, r).probability <= berry_esseen_bound(r, m, m * third, 4.0);
    }
  }
  o.require(small_ball_ok == small_ball_total, "small-ball bound");
  o.detail << " oracle err " << oracle_err << ", |J| " << ok_j << "/1000, |J'| " << ok_jp
           << "/1000, small ball " << small_ball_ok << "/" << small_ball_total;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lagspec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  return cli::main_entry(static_cast<int>(argv.size()), argv.data(), {}, sink, sink);
}

Outcome reproducibility() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() /
                    ("lagspec-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  const std::vector<std::string> ens{"--set", "seed=2718", "--set", "ensemble.n=40",
                                     "--set", "ensemble.big_n=40", "--set", "ensemble.k=1",
                                     "--set", "ensemble.law=complex-gaussian"};
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"esd", {"--set", "trials=3", "--set", "n_values=[24,40]", "--set", "lag_modes=[\"one\",\"log\"]"}},
      {"lsv-tail", {"--set", "trials=20", "--set", "z_list=[1,[0.5,0.5]]"}},
      {"linearize-check", {"--set", "trials=4", "--set", "k_values=[1,7]", "--set", "z_list=[1,[0,1]]"}},
      {"rank-perturbation", {"--set", "trials=4", "--set", "z_list=[1,-0.5]"}},
      {"hermitize", {"--set", "trials=2", "--set", "grid.h=0.4"}},
      {"fixed-point", {"--set", "ensemble.k=20", "--set", "trials=3", "--set", "z_list=[1]",
                       "--set", "t_list=[0.5]"}},
      {"large-k", {"--set", "ensemble.k=20", "--set", "ensemble.big_n=60", "--set", "trials=2",
                   "--set", "z_list=[1]", "--set", "t_list=[0.5]", "--set", "n_values=[20,40]"}},
      {"limit-law-table", {"--set", "limit_law.gamma0=2"}},
      {"law-diagnostics", {"--set", "diagnostics.n=30", "--set", "diagnostics.samples=20000"}},
  };
  std::size_t compared = 0;
  for (const auto& [sub, extra] : runs) {
    const auto first = root / sub / "first";
    const auto second = root / sub / "second";
    std::vector<std::string> args{sub, "-o", first.string(), "-j", "1"};
    if (sub != "limit-law-table") args.insert(args.end(), ens.begin(), ens.end());
    args.insert(args.end(), extra.begin(), extra.end());
    const int rc = invoke(args);
    if (rc != 0 && rc != 2) {
      o.require(false, sub + " exited with " + std::to_string(rc));
      continue;
    }
    const int rc2 = invoke({"replay", (first / "manifest.json").string(), "-o", second.string(), "-j", "4"});
    o.require(rc2 == rc, sub + " replay exit code");
    const auto manifest = nlohmann::json::parse(slurp(first / "manifest.json"));
    for (const auto& f : manifest["outputs"]) {
      const std::string name = f.get<std::string>();
      if (!name.ends_with(".csv")) continue;
      ++compared;
      o.require(slurp(first / name) == slurp(second / name), sub + "/" + name);
    }
  }
  std::filesystem::remove_all(root);
  o.detail << " " << runs.size() << " subcommands, " << compared << " CSV files byte-identical at 1 vs 4 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 finite-n inequalities", finite_n_suite},
      {"2 limit law", limit_law_suite},
      {"3 ESD convergence", esd_convergence},
      {"4 least singular value tail", lsv_tail},
      {"5 fixed-point regime", fixed_point_regime},
      {"6 geometry", geometry_suite},
      {"7 reproducibility", reproducibility},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << " (" << std::fixed
              << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::setprecision(6)
              << o.detail.str() << std::endl;
    failures += !o.pass;
  }
  std::cout << (failures ? "acceptance: FAIL" : "acceptance: PASS") << " (" << 7 - failures
            << "/7 criteria)" << std::endl;
  return failures ? 1 : 0;
}
