// lineleak: synthesize scenes, lift them to line clouds, recover points from
// the lines and measure how well that worked.
//
// Every subcommand prints a JSON summary to stdout and writes a run manifest
// next to its outputs. Exit codes: 0 success, 1 usage, 2 data error,
// 3 internal error.

#include <omp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lineleak/error.hpp"
#include "lineleak/eval.hpp"
#include "lineleak/io.hpp"
#include "lineleak/linecloud.hpp"
#include "lineleak/recover.hpp"
#include "lineleak/scene.hpp"

#ifndef LINELEAK_VERSION
#define LINELEAK_VERSION "unknown"
#endif

namespace {

using nlohmann::json;
using namespace lineleak;

constexpr int kSchemaVersion = 1;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSamples:
      return kExitUsage;
    default:
      return kExitData;
  }
}

struct Options {
  int threads = 0;

  // synth
  std::string kind = "room";
  double extent = 4.0;
  double density = 2500.0;
  double noise = 0.0;
  double texture = SceneSpec{}.texture_fraction;
  double blob_sigma = SceneSpec{}.blob_sigma;
  double blobs_per_area = SceneSpec{}.blobs_per_area;
  std::string planes;

  std::string in;
  std::string out;
  std::uint64_t seed = 0;

  // lift
  std::optional<double> anchor_spread;
  bool keep_anchors = false;

  // sparsify / sweep
  double fraction = 1.0;
  std::vector<double> fractions{1.0, 0.10, 0.05, 0.01};
  bool outdoor = false;
  bool oracle = false;

  // recover
  std::string preset = "indoor-dense";
  std::optional<int> iterations;
  std::optional<double> ks_stop;
  std::optional<std::size_t> k_coarse;
  std::optional<std::size_t> k_refine;
  std::optional<std::size_t> min_candidates;
  std::string fallback = "keep-previous";
  bool line_line_every_iteration = false;

  // eval
  std::string truth;
  std::string est;

  // mc
  std::size_t samples = 1000000;
  std::vector<double> p1{1.0, 0.0, 0.0};

  // sor
  std::size_t k_nn = 20;
  double alpha = 2.0;

  // replay
  std::string manifest;
};

struct Outcome {
  json config = json::object();
  json inputs = json::object();
  json outputs = json::object();
  json summary = json::object();
  std::string manifest_path;
  std::vector<std::string> warnings;
};

std::string manifest_for_file(const std::string& out) { return out + ".manifest.json"; }

std::string manifest_for_dir(const std::string& dir) { return (std::filesystem::path(dir) / "manifest.json").string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());
}

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

SceneSpec scene_spec(const Options& o) {
  SceneSpec s;
  s.kind = scene_kind_from_string(o.kind);
  s.extent = o.extent;
  s.points_per_unit_area = o.density;
  s.noise_sigma = o.noise;
  s.seed = o.seed;
  s.texture_fraction = o.texture;
  s.blob_sigma = o.blob_sigma;
  s.blobs_per_area = o.blobs_per_area;
  s.planes_path = o.planes;
  return s;
}

RecoveryConfig recovery_config(const Options& o) {
  RecoveryConfig cfg = preset(o.preset);
  if (o.iterations) cfg.iterations = *o.iterations;
  if (o.ks_stop) cfg.ks_stop = *o.ks_stop;
  if (o.k_coarse) cfg.k_coarse = *o.k_coarse;
  if (o.k_refine) cfg.k_refine = *o.k_refine;
  if (o.min_candidates) cfg.min_candidates = *o.min_candidates;
  cfg.fallback = fallback_from_string(o.fallback);
  cfg.line_line_every_iteration = o.line_line_every_iteration;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

Outcome cmd_synth(const Options& o) {
  const SceneSpec spec = scene_spec(o);
  const PointCloud pc = synth_scene(spec);
  write_ply(pc, o.out);
  Outcome r;
  r.config = {{"kind", to_string(spec.kind)},       {"extent", spec.extent},
              {"density", spec.points_per_unit_area}, {"noise", spec.noise_sigma},
              {"texture", spec.texture_fraction},    {"blob_sigma", spec.blob_sigma},
              {"blobs_per_area", spec.blobs_per_area}};
  if (!o.planes.empty()) r.inputs["planes"] = o.planes;
  r.outputs["points"] = o.out;
  r.summary = {{"points", pc.size()}, {"bounding_diagonal", bounding_diagonal(pc)}};
  r.manifest_path = manifest_for_file(o.out);
  return r;
}

Outcome cmd_lift(const Options& o) {
  const PointCloud pc = read_ply(o.in);
  LineCloud lc = lift(pc, o.seed);
  lc.payloads = pc.payloads;
  const double spread = o.anchor_spread.value_or(bounding_diagonal(pc));
  if (!o.keep_anchors) lc = obfuscate_anchors(lc, spread, o.seed + 1);
  write_lines(lc, o.out);
  Outcome r;
  r.config = {{"anchor_spread", o.keep_anchors ? 0.0 : spread}, {"keep_anchors", o.keep_anchors}};
  r.inputs["points"] = o.in;
  r.outputs["lines"] = o.out;
  r.summary = {{"lines", lc.size()}};
  r.manifest_path = manifest_for_file(o.out);
  return r;
}

Outcome cmd_sparsify(const Options& o) {
  Outcome r;
  const LineCloud lc = read_lines(o.in, &r.warnings);
  const LineCloud kept = sparsify(lc, o.fraction, o.seed);
  write_lines(kept, o.out);
  r.config = {{"fraction", o.fraction}};
  r.inputs["lines"] = o.in;
  r.outputs["lines"] = o.out;
  r.summary = {{"lines_in", lc.size()}, {"lines_out", kept.size()}};
  r.manifest_path = manifest_for_file(o.out);
  return r;
}

Outcome cmd_recover(const Options& o) {
  Outcome r;
  const RecoveryConfig cfg = recovery_config(o);
  const LineCloud lc = read_lines(o.in, &r.warnings);
  const RecoveryOutput out = recover(lc, cfg);
  if (!(out.max_line_residual <= 1e-9)) {
    throw std::logic_error("recovered point off its line by " + std::to_string(out.max_line_residual));
  }

  PointCloud pc;
  SourceMap map;
  map.total = lc.size();
  for (std::size_t i = 0; i < lc.size(); ++i) {
    if (!out.estimates.valid[i]) continue;
    pc.points.push_back(out.estimates.positions[i]);
    if (lc.has_payloads()) pc.payloads.push_back(lc.payloads[i]);
    map.indices.push_back(lc.source_indices.empty() ? i : lc.source_indices[i]);
  }
  write_ply(pc, o.out, &map);

  r.config = to_json(cfg);
  r.config["preset"] = o.preset;
  r.inputs["lines"] = o.in;
  r.outputs["points"] = o.out;
  r.summary = to_json(out);
  r.manifest_path = manifest_for_file(o.out);
  return r;
}

Outcome cmd_eval(const Options& o) {
  const PointCloud truth = read_ply(o.truth);
  SourceMap map;
  const PointCloud est = read_ply(o.est, &map);
  if (map.indices.empty()) {
    map.total = est.size();
    for (std::size_t i = 0; i < est.size(); ++i) map.indices.push_back(i);
  }
  PointCloud aligned;
  PointEstimates estimates;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (map.indices[i] >= truth.size()) {
      throw Error(ErrorCode::MisalignedInputs, o.est + ": source index " + std::to_string(map.indices[i]) +
                                                   " outside the truth cloud (" + std::to_string(truth.size()) + ")");
    }
    aligned.points.push_back(truth.points[map.indices[i]]);
    estimates.positions.push_back(est.points[i]);
    estimates.valid.push_back(1);
  }
  ErrorReport report = error_report(aligned, estimates);
  // Lines without an estimate count against the valid fraction.
  report.total = std::max(map.total, est.size());
  report.valid_fraction =
      report.total == 0 ? 0.0 : static_cast<double>(report.valid_count) / static_cast<double>(report.total);

  ensure_dir(o.out);
  const std::string cdf = (std::filesystem::path(o.out) / "cdf.csv").string();
  const std::string summary = (std::filesystem::path(o.out) / "summary.json").string();
  write_cdf_csv(report.cdf, "threshold,fraction", cdf);
  write_json(to_json(report), summary);

  Outcome r;
  r.inputs = {{"truth", o.truth}, {"estimates", o.est}};
  r.outputs = {{"cdf", cdf}, {"summary", summary}};
  r.summary = to_json(report);
  r.manifest_path = manifest_for_dir(o.out);
  return r;
}

Outcome cmd_sweep(const Options& o) {
  const PointCloud truth = read_ply(o.truth);
  SweepOptions so;
  so.seed = o.seed;
  so.outdoor = o.outdoor;
  so.oracle = o.oracle;
  if (o.iterations) so.iterations = *o.iterations;
  if (o.ks_stop) so.ks_stop = *o.ks_stop;
  const auto rows = sparsity_sweep(truth, o.fractions, so);

  ensure_dir(o.out);
  const std::string csv = (std::filesystem::path(o.out) / "sweep.csv").string();
  write_sweep_csv(rows, csv);

  Outcome r;
  r.config = {{"fractions", o.fractions}, {"outdoor", o.outdoor}, {"oracle", o.oracle},
              {"iterations", so.iterations}, {"ks_stop", so.ks_stop}};
  r.inputs["truth"] = o.truth;
  r.outputs["sweep"] = csv;
  json rows_json = json::array();
  for (const SweepRow& row : rows) {
    json j = to_json(row.report);
    j["fraction"] = row.fraction;
    j["preset"] = row.preset;
    j["lines"] = row.lines;
    rows_json.push_back(j);
  }
  r.summary = {{"rows", rows_json}};
  r.manifest_path = manifest_for_dir(o.out);
  return r;
}

Outcome cmd_mc(const Options& o) {
  const Point3 p1{o.p1[0], o.p1[1], o.p1[2]};
  const MonteCarloReport report = montecarlo_two_point(o.samples, o.seed, p1);
  ensure_dir(o.out);
  const std::string csv = (std::filesystem::path(o.out) / "mc_cdf.csv").string();
  write_cdf_csv(report.cdf, "x,fraction", csv);

  Outcome r;
  r.config = {{"samples", o.samples}, {"p1", o.p1}};
  r.outputs["cdf"] = csv;
  r.summary = to_json(report);
  r.manifest_path = manifest_for_dir(o.out);
  return r;
}

Outcome cmd_sor(const Options& o) {
  SourceMap map;
  const PointCloud pc = read_ply(o.in, &map);
  std::vector<std::size_t> kept;
  const PointCloud filtered = remove_statistical_outliers(pc, o.k_nn, o.alpha, &kept);
  SourceMap out_map;
  out_map.total = map.indices.empty() ? pc.size() : map.total;
  for (std::size_t i : kept) out_map.indices.push_back(map.indices.empty() ? i : map.indices[i]);
  write_ply(filtered, o.out, &out_map);

  Outcome r;
  r.config = {{"k", o.k_nn}, {"alpha", o.alpha}};
  r.inputs["points"] = o.in;
  r.outputs["points"] = o.out;
  r.summary = {{"points_in", pc.size()}, {"points_out", filtered.size()}};
  r.manifest_path = manifest_for_file(o.out);
  return r;
}

int run(const std::vector<std::string>& args);

struct Cli {
  CLI::App app{"Recover 3D points from line clouds and evaluate the recovery"};
  Options o;
  CLI::App* synth = nullptr;
  CLI::App* lift = nullptr;
  CLI::App* sparsify = nullptr;
  CLI::App* recover = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* mc = nullptr;
  CLI::App* sor = nullptr;
  CLI::App* replay = nullptr;

  Cli() {
    app.require_subcommand(1);
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    synth = app.add_subcommand("synth", "Sample a synthetic scene to a PLY file");
    synth->add_option("--kind", o.kind, "room | facade | planes")->check(CLI::IsMember({"room", "facade", "planes"}));
    synth->add_option("--extent", o.extent, "Scene size in scene units")->check(CLI::PositiveNumber);
    synth->add_option("--density", o.density, "Points per unit area")->check(CLI::NonNegativeNumber);
    synth->add_option("--noise", o.noise, "Gaussian noise along the surface normal")->check(CLI::NonNegativeNumber);
    synth->add_option("--texture", o.texture, "Share of points drawn from texture blobs")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--blob-sigma", o.blob_sigma, "Blob sigma as a fraction of extent")->check(CLI::PositiveNumber);
    synth->add_option("--blobs-per-area", o.blobs_per_area, "Blobs per extent^2 of surface")
        ->check(CLI::PositiveNumber);
    synth->add_option("--planes", o.planes, "Planes file for --kind planes");
    synth->add_option("--seed", o.seed);
    synth->add_option("--out", o.out, "Output PLY")->required();

    lift = app.add_subcommand("lift", "Replace every point by a random line through it");
    lift->add_option("--in", o.in, "Input PLY")->required();
    lift->add_option("--out", o.out, "Output line file")->required();
    lift->add_option("--seed", o.seed);
    lift->add_option("--anchor-spread", o.anchor_spread,
                     "Anchors move along their line by up to this much (default: bounding diagonal)")
        ->check(CLI::NonNegativeNumber);
    lift->add_flag("--keep-anchors", o.keep_anchors, "Export the points themselves as anchors");

    sparsify = app.add_subcommand("sparsify", "Keep a random subset of the lines");
    sparsify->add_option("--in", o.in, "Input line file")->required();
    sparsify->add_option("--out", o.out, "Output line file")->required();
    sparsify->add_option("--fraction", o.fraction)->required()->check(CLI::Range(0.0, 1.0));
    sparsify->add_option("--seed", o.seed);

    recover = app.add_subcommand("recover", "Estimate one point per line");
    recover->add_option("--in", o.in, "Input line file")->required();
    recover->add_option("--out", o.out, "Output PLY of valid estimates")->required();
    recover->add_option("--preset", o.preset, "indoor-dense | indoor-sparse | outdoor-dense | outdoor-sparse")
        ->check(CLI::IsMember(preset_names()));
    recover->add_option("--iterations", o.iterations)->check(CLI::PositiveNumber);
    recover->add_option("--ks-stop", o.ks_stop)->check(CLI::Range(0.0, 2.0));
    recover->add_option("--k-coarse", o.k_coarse)->check(CLI::PositiveNumber);
    recover->add_option("--k-refine", o.k_refine)->check(CLI::PositiveNumber);
    recover->add_option("--min-candidates", o.min_candidates)->check(CLI::PositiveNumber);
    recover->add_option("--fallback", o.fallback, "keep-previous | invalidate")
        ->check(CLI::IsMember({"keep-previous", "invalidate"}));
    recover->add_flag("--line-line-every-iteration", o.line_line_every_iteration,
                      "Also use the first iteration's line-line neighbors when refining");
    recover->add_option("--seed", o.seed);

    eval = app.add_subcommand("eval", "Compare recovered points with the truth");
    eval->add_option("--truth", o.truth, "Ground-truth PLY")->required();
    eval->add_option("--est", o.est, "Recovered PLY (with its .sources sidecar)")->required();
    eval->add_option("--out", o.out, "Output directory")->required();

    sweep = app.add_subcommand("sweep", "Recovery error across sparsity levels");
    sweep->add_option("--truth", o.truth, "Ground-truth PLY")->required();
    sweep->add_option("--fractions", o.fractions)->check(CLI::Range(0.0, 1.0));
    sweep->add_flag("--outdoor", o.outdoor, "Use the outdoor presets");
    sweep->add_flag("--oracle", o.oracle, "Use true 50-NN neighborhoods");
    sweep->add_option("--iterations", o.iterations)->check(CLI::PositiveNumber);
    sweep->add_option("--ks-stop", o.ks_stop)->check(CLI::Range(0.0, 2.0));
    sweep->add_option("--seed", o.seed);
    sweep->add_option("--out", o.out, "Output directory")->required();

    mc = app.add_subcommand("mc", "Two-point closest-point Monte Carlo experiment");
    mc->add_option("--samples", o.samples)->check(CLI::NonNegativeNumber);
    mc->add_option("--p1", o.p1, "Second point (the first is the origin)")->expected(3);
    mc->add_option("--seed", o.seed);
    mc->add_option("--out", o.out, "Output directory")->required();

    sor = app.add_subcommand("sor", "Statistical outlier removal");
    sor->add_option("--in", o.in, "Input PLY")->required();
    sor->add_option("--out", o.out, "Output PLY")->required();
    sor->add_option("--k", o.k_nn, "Neighbors per point")->check(CLI::PositiveNumber);
    sor->add_option("--alpha", o.alpha, "Standard deviations above the mean")->check(CLI::PositiveNumber);

    replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", o.manifest)->required();
  }
};

int run(const std::vector<std::string>& args) {
  Cli cli;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  const Options& o = cli.o;

  if (cli.replay->parsed()) {
    std::ifstream f(o.manifest);
    if (!f) throw Error(ErrorCode::IoError, "cannot open manifest '" + o.manifest + "'");
    json m;
    try {
      m = json::parse(f);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, o.manifest + ": " + e.what());
    }
    if (!m.contains("argv") || !m["argv"].is_array()) {
      throw Error(ErrorCode::ParseError, o.manifest + ": no argv recorded");
    }
    return run(m["argv"].get<std::vector<std::string>>());
  }

  if (o.threads > 0) omp_set_num_threads(o.threads);
  const auto start = std::chrono::steady_clock::now();

  std::string name;
  Outcome r;
  if (cli.synth->parsed()) {
    name = "synth";
    r = cmd_synth(o);
  } else if (cli.lift->parsed()) {
    name = "lift";
    r = cmd_lift(o);
  } else if (cli.sparsify->parsed()) {
    name = "sparsify";
    r = cmd_sparsify(o);
  } else if (cli.recover->parsed()) {
    name = "recover";
    r = cmd_recover(o);
  } else if (cli.eval->parsed()) {
    name = "eval";
    r = cmd_eval(o);
  } else if (cli.sweep->parsed()) {
    name = "sweep";
    r = cmd_sweep(o);
  } else if (cli.mc->parsed()) {
    name = "mc";
    r = cmd_mc(o);
  } else {
    name = "sor";
    r = cmd_sor(o);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const std::string& w : r.warnings) std::cerr << "warning: " << w << '\n';

  json manifest = {{"schema_version", kSchemaVersion},
                   {"subcommand", name},
                   {"argv", args},
                   {"config", r.config},
                   {"seed", o.seed},
                   {"inputs", r.inputs},
                   {"outputs", r.outputs},
                   {"version", LINELEAK_VERSION},
                   {"threads", o.threads},
                   {"wall_seconds", seconds}};
  write_json(manifest, r.manifest_path);

  json stdout_json = {{"schema_version", kSchemaVersion},
                      {"subcommand", name},
                      {"summary", r.summary},
                      {"outputs", r.outputs},
                      {"manifest", r.manifest_path},
                      {"wall_seconds", seconds}};
  if (!r.warnings.empty()) stdout_json["warnings"] = r.warnings;
  std::cout << stdout_json.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const lineleak::Error& e) {
    std::cerr << "error [" << lineleak::to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
