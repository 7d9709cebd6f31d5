#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvgames/dynamics.hpp"
#include "tvgames/spectral.hpp"

namespace tvgames {

// Plain description of a payoff schedule as it appears in a config file.
struct ScheduleSpec {
  enum class Kind { Periodic, Perturbed, Explicit };
  Kind kind = Kind::Periodic;
  std::vector<RealMatrix> matrices;  // periodic entries or explicit prefix
  RealMatrix stable;                 // perturbed
  RealMatrix base;                   // perturbed
  DecayKind decay = DecayKind::PowerLaw;
  double exponent = 1.0;
  RealMatrix tail;                   // explicit

  PayoffSchedule build() const;
};

struct InitSpec {
  enum class Kind { Explicit, EigvecTop, RandomUnit };
  Kind kind = Kind::RandomUnit;
  RealVector x0;
  RealVector y0;
  std::optional<RealVector> x_prev;
  std::optional<RealVector> y_prev;
};

struct SeriesSpec {
  std::string label;
  ScheduleSpec schedule;
  DynamicsConfig dynamics;  // unset fields resolve to the defaults
  InitSpec init;
  std::vector<std::string> measures;  // empty: every default measure
};

struct ExperimentConfig {
  std::string name;
  std::string note;  // free text shown by `presets`
  Round rounds = 1000;
  std::uint64_t seed = 0;
  std::optional<Round> stride;  // CSV sampling stride
  bool svg = false;
  bool spectral_report = false;
  std::vector<SeriesSpec> series;
};

// JSON text <-> config. Parse errors carry the line and column, field errors
// the offending path (e.g. series[1].schedule.matrices[0]). ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

const std::vector<std::string>& preset_ids();
ExperimentConfig preset(std::string_view id);

// State the series starts from; random inits draw from `seed` and the series
// position so every series of a config is reproducible on its own.
JointState initial_state(const SeriesSpec& spec, std::uint64_t seed, std::size_t series_index);

struct SeriesResult {
  std::string label;
  DynamicsConfig dynamics;  // resolved
  std::vector<Measure> measures;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  Round status_round = 0;
  Round rounds_completed = 0;
  std::vector<double> final_deltas;  // one per measure
  // The rows written to the CSV.
  std::vector<Round> sample_rounds;
  std::vector<std::vector<double>> samples;  // samples[k][j], measure k
  std::filesystem::path csv_path;
  std::optional<Trajectory> trajectory;  // kept when RunOptions asks for it
};

struct RunOptions {
  bool keep_trajectories = false;
  bool write_files = true;
};

struct RunResult {
  std::vector<SeriesResult> series;
  std::vector<std::filesystem::path> files;
  int exit_code = 0;  // 0 completed / underflow, 2 if any series diverged
};

// Simulates every series, writes the trajectory CSVs (and optional spectrum
// and SVG files) under `out_dir`.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         const RunOptions& options = {});

// Default output directory: $TVG_OUT_DIR, else ./tvg_out.
std::filesystem::path default_out_dir();

// --- sweep

enum class SweepParam { Eta, Alpha, Gamma, Step, Beta1, Beta2, Exponent };
std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view name);

struct GridAxis {
  SweepParam param = SweepParam::Eta;
  std::vector<double> values;
};

// "start:stop:step" (inclusive of stop up to rounding) or "v1,v2,...".
std::vector<double> parse_grid_values(std::string_view text);
// "name=values"
GridAxis parse_grid_axis(std::string_view text);

constexpr std::size_t kMaxSweepCells = 10'000;

struct SweepRow {
  std::vector<double> params;
  double fitted_rate = 0.0;       // per round; NaN when the fit is impossible
  std::optional<double> theoretical_rate;
  double relative_gap = 0.0;      // NaN without a theoretical rate
  double final_delta = 0.0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
};

// Sweeps the first series of `base` over the grid; cells run concurrently and
// rows come back in grid order (first axis outermost).
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                            unsigned threads = 0);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<GridAxis>& axes,
                     const std::vector<SweepRow>& rows);

// --- analyze

struct AnalysisResult {
  std::string label;
  SpectralReport report;
  std::size_t period = 1;
  double spectral_radius = 0.0;
  double threshold = 0.0;
  double configured_step = 0.0;
  StaticEigenFamily family;  // of the reference matrix
  std::string verdict;
};

AnalysisResult analyze_series(const SeriesSpec& spec);
std::vector<AnalysisResult> analyze_experiment(const ExperimentConfig& config,
                                               const std::filesystem::path& out_dir);

// --- files

// Default CSV stride: max(1, rounds / 10^4).
Round default_stride(Round rounds);

// stride, 2 stride, ... plus `completed` itself.
std::vector<Round> sampled_rounds(Round completed, Round stride);

// Rows at sampled_rounds(rounds_completed, stride); the status column reads
// "running" except on the last row, which carries the final status.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, Round stride);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::vector<double> column(std::string_view name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

void write_spectrum_csv(const std::filesystem::path& path, const AnalysisResult& analysis);
void write_summary_csv(const std::filesystem::path& path, const AnalysisResult& analysis);

struct SvgLine {
  std::string label;
  std::vector<Round> t;
  std::vector<double> values;
};

// ln(values) against t on a log-scale y axis; nonpositive values are skipped.
void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::vector<SvgLine>& lines);

// %.17g, with inf / -inf / nan spelled out.
std::string format_double(double v);

}  // namespace tvgames
