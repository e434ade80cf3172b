#pragma once

// Seeded Monte Carlo drivers. Every driver is a pure function of its config:
// trial i of a series always uses SeededTrial::make(series_seed, i), and the
// results are stored by trial index, so reports do not depend on the number
// of worker threads.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "lagspec/ensembles.hpp"
#include "lagspec/fixed_point.hpp"
#include "lagspec/io.hpp"

namespace lagspec {

// How the lag is chosen when the ESD driver sweeps n.
enum class LagMode {
  Fixed,  // spec.k at every n
  One,    // k = 1
  Log,    // k = max(1, floor(n / ln^2 n))
};

std::string_view to_string(LagMode mode);
LagMode lag_mode_from_string(std::string_view name);
Eigen::Index lag_for(LagMode mode, Eigen::Index n, Eigen::Index fixed_k);

// Pilot-calibrated defaults; see README for the list.
const std::map<std::string, double>& default_thresholds();

struct HermitizeGrid {
  double x_min = -1.6;
  double x_max = 1.6;
  double y_min = -1.6;
  double y_max = 1.6;
  double h = 0.1;
};

struct ExperimentConfig {
  EnsembleSpec spec;
  std::size_t trials = 1;
  std::vector<Complex> z_list;
  std::vector<double> t_list;
  std::map<std::string, double> thresholds;  // overrides of default_thresholds()
  std::filesystem::path output_path;
  unsigned threads = 1;

  // Dimension sweep for esd / large-k stability; N scales as round(gamma0 n).
  std::vector<Eigen::Index> n_values;
  std::vector<LagMode> lag_modes{LagMode::Fixed};
  std::vector<Eigen::Index> k_values;  // linearization sweep
  std::optional<double> norm_bound;    // C0; default_norm_bound(N, n) when unset
  double tail_constant = 1.0;          // C in the C n^{-1/22} budget
  double delta = 0.1;                  // small-singular-value window
  HermitizeGrid grid;
  int tv_pool = 4;                     // histogram cells pooled per side for TV
  double singular_floor = 1e-12;

  double threshold(const std::string& name) const;
  // Throws DomainError for unusable settings.
  void validate() const;
};

// ---------------------------------------------------------------------------
// ESD convergence

struct RotationReport {
  double ks = 0.0;
  std::size_t count = 0;  // eigenvalues with |lambda| > 1e-8
  bool inconclusive = false;
};

// KS distance of eigenvalue arguments against Uniform[0, 2 pi).
RotationReport rotation_invariance_test(const EigenSpectrum& eigs);

// sup |F_hat - F| for the radii |lambda_i| against the gamma0 limit law.
double radial_ks(const EigenSpectrum& eigs, double gamma0);

struct EsdTrial {
  Eigen::Index n = 0, big_n = 0, k = 0;
  LagMode mode = LagMode::Fixed;
  std::uint64_t trial_index = 0, seed = 0;
  double ks_radial = 0.0;
  RotationReport rotation;
  bool skipped = false;  // eigensolver failure; excluded from the means
};

struct EsdSeries {
  Eigen::Index n = 0, big_n = 0, k = 0;
  LagMode mode = LagMode::Fixed;
  double mean_ks = 0.0;
  double mean_angular_ks = 0.0;
};

struct ConvergenceReport {
  std::string kind;
  std::vector<EsdTrial> trials;
  std::vector<EsdSeries> series;
  std::map<std::string, bool> checks;
  std::map<std::string, double> statistics;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;
  std::vector<CsvTable> tables;

  bool pass() const;
  nlohmann::json to_json() const;
};

ConvergenceReport esd_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Least singular value tail

struct LsvTailReport {
  double threshold = 0.0;  // n^{-37/22}
  double budget = 0.0;     // C n^{-1/22}
  double norm_bound = 0.0;
  struct PerZ {
    Complex z;
    double event_frequency = 0.0;  // s_N <= threshold and ||X|| <= C0
    double norm_frequency = 0.0;   // ||X|| <= C0
    double min_s = 0.0;
    double median_s = 0.0;
  };
  std::vector<PerZ> per_z;
  std::map<std::string, bool> checks;
  std::vector<std::uint64_t> seeds;
  double runtime_seconds = 0.0;
  std::vector<CsvTable> tables;

  bool pass() const;
  nlohmann::json to_json() const;
};

LsvTailReport lsv_tail_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Linearization

struct LinearizationReport {
  double s_min_h_prime = 0.0;
  double s_min_y = 0.0;
  bool lsv_ok = false;           // s_{N+n-k}(H') <= s_N(Y - zI)
  double multiset_max_diff = 0.0;
  bool multiset_ok = false;      // sorted singular values of H and H' agree to 1e-10
  double norm_h = 0.0;
  double norm_bound = 0.0;       // |z| + 1 + ||X||
  bool norm_ok = false;
  bool reordered = false;

  bool pass() const { return lsv_ok && multiset_ok && norm_ok; }
};

LinearizationReport linearization_check(const ComplexMatrix& x, Complex z, Eigen::Index k);

struct SweepReport {
  std::string kind;
  std::size_t checks_run = 0;
  std::size_t checks_failed = 0;
  std::map<std::string, double> statistics;
  std::vector<std::uint64_t> seeds;
  double runtime_seconds = 0.0;
  std::vector<CsvTable> tables;

  bool pass() const { return checks_run > 0 && checks_failed == 0; }
  nlohmann::json to_json() const;
};

// Every (trial, k in k_values, z in z_list) combination at spec's (n, N).
SweepReport linearization_sweep(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Rank-one perturbation (Y vs Z at lag 1)

struct RankPerturbationReport {
  bool interlacing_ok = false;    // s_i(Y - zI) >= s_{i+1}(Z - zI) and vice versa
  double min_margin = 0.0;
  Eigen::Index difference_rank = 0;
  double log_mass_y = 0.0;        // |int_0^delta ln x dnu_{Y - zI}|
  double log_mass_z = 0.0;        // |int_0^delta ln x dnu_{Z - zI}|
  double log_mass_bound = 0.0;    // (1/N)|ln s_N(Y - zI)| + log_mass_z
  bool log_mass_ok = false;

  bool pass() const { return interlacing_ok && difference_rank == 1 && log_mass_ok; }
};

RankPerturbationReport rank_perturbation_experiment(const ComplexMatrix& x, Complex z,
                                                    double delta = 0.1);

SweepReport rank_perturbation_sweep(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Hermitization

struct HermitizationReport {
  Eigen::Index grid_x = 0, grid_y = 0;
  double h = 0.0;
  double mass_before_normalization = 0.0;
  double tv_distance = 0.0;
  double determinant_identity_max_error = 0.0;  // relative, trial 0
  std::size_t flagged_cells = 0;
  std::map<std::string, bool> checks;
  std::vector<std::uint64_t> seeds;
  double runtime_seconds = 0.0;
  std::vector<CsvTable> tables;

  bool pass() const;
  nlohmann::json to_json() const;
};

// -(1/N) sum ln max(s_i(M - zI), floor); sets `flagged` when flooring kicked in.
double hermitized_log_potential(const ComplexMatrix& m, Complex z, double floor,
                                bool* flagged = nullptr);

HermitizationReport hermitization_pipeline(const ExperimentConfig& config,
                                           const HermitizeGrid& grid, double singular_floor);

// ---------------------------------------------------------------------------
// Large lag (k >= n/2)

struct ResolventComparison {
  Complex z;
  double t = 0.0;
  FixedPointSolution solution;
  Complex predicted;
  Complex empirical;
  double abs_error = 0.0;
};

struct LargeKReport {
  std::vector<ResolventComparison> resolvent;
  double stability_ks = -1.0;  // negative when fewer than two sizes ran
  std::vector<std::pair<Eigen::Index, double>> angular_ks;  // reported only
  Eigen::Index min_atom_count = -1;  // over trials, when N > n
  Eigen::Index required_atom_count = 0;
  std::map<std::string, bool> checks;
  std::vector<std::uint64_t> seeds;
  double runtime_seconds = 0.0;
  std::vector<CsvTable> tables;

  bool pass() const;
  nlohmann::json to_json() const;
};

// Empirical vs predicted resolvent traces over z_list x t_list, averaged
// over trials at spec's (n, N, k).
std::vector<ResolventComparison> resolvent_comparison(const ExperimentConfig& config);
CsvTable resolvent_table(const std::vector<ResolventComparison>& rows);

LargeKReport large_k_experiment(const ExperimentConfig& config);

}  // namespace lagspec
