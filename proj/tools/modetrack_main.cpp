// Command-line front end: classify eigenmodes of a morphing resonator
// cross-section by tracking them to a canonical disk, plus analytic spectrum
// and crossing utilities. All outputs are deterministic CSV/JSON written
// atomically; rerunning a command reproduces the files byte for byte.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modetrack/discretize.hpp"
#include "modetrack/geometry_io.hpp"
#include "modetrack/io_util.hpp"
#include "modetrack/spectra.hpp"
#include "modetrack/tracker.hpp"

using namespace modetrack;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

bool log_enabled() {
  const char* env = std::getenv("MODETRACK_LOG");
  return env != nullptr && *env != '\0';
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[modetrack] " << msg << "\n";
}

struct CommonOpts {
  std::string geometry;
  std::string homotopy = "algebraic";
  std::string out_dir = ".";
  double h0 = 0.1;
  double h_min = 0.00125;
  double phi_min = 0.9;
  double beta = 0.5;
  double delta = 1e-6;
  int refine = -1;     // -1: fixture default
  int quad = 0;        // 0: degree + 2
  int candidates = 0;  // 0: auto
  double rel_tol = -1.0;  // -1: fixture default
  double mu = vacuum_mu;
  double eps = vacuum_eps;
};

void add_tracker_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--geometry", opts.geometry, "geometry fixture JSON")
      ->required();
  cmd->add_option("--homotopy", opts.homotopy,
                  "pencil homotopy: algebraic|physical")
      ->check(CLI::IsMember({"algebraic", "physical"}));
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--h0", opts.h0, "initial stepsize");
  cmd->add_option("--h-min", opts.h_min, "minimal stepsize before warning");
  cmd->add_option("--phi-min", opts.phi_min, "correlation acceptance threshold");
  cmd->add_option("--beta", opts.beta, "stepsize reduction factor");
  cmd->add_option("--delta", opts.delta, "finite-difference step");
  cmd->add_option("--refine", opts.refine, "solution-space refinement levels");
  cmd->add_option("--quad", opts.quad, "quadrature points per direction");
  cmd->add_option("--candidates", opts.candidates, "eigenpairs solved per step");
  cmd->add_option("--rel-tol", opts.rel_tol, "classification tolerance");
  cmd->add_option("--mu", opts.mu, "permeability [H/m]");
  cmd->add_option("--eps", opts.eps, "permittivity [F/m]");
}

struct LoadedProblem {
  GeometryFixture fixture;
  DiskReference reference;
  DiscreteSpace space;
  std::unique_ptr<PencilProvider> provider;
  TrackerConfig config;
  std::string checksum;
};

LoadedProblem load_problem(const CommonOpts& opts) {
  GeometryFixture fixture = load_geometry_fixture(opts.geometry);
  if (!fixture.reference)
    throw std::runtime_error(
        "geometry fixture names no reference spectrum; cannot classify");
  DiskReference ref = *fixture.reference;
  const int levels = opts.refine >= 0 ? opts.refine : ref.refine_levels;
  if (opts.rel_tol > 0.0) ref.rel_tol = opts.rel_tol;

  DiscreteSpace space =
      DiscreteSpace::from_geometry(fixture.morph, ref.bc, levels);
  log_line("space: " + std::to_string(space.num_active()) + " active DoFs");

  std::unique_ptr<PencilProvider> provider;
  if (opts.homotopy == "physical")
    provider = std::make_unique<PhysicalPencilProvider>(
        fixture.morph, space, opts.quad, opts.delta);
  else
    provider = std::make_unique<AlgebraicPencilProvider>(fixture.morph, space,
                                                         opts.quad);

  TrackerConfig config;
  config.h0 = opts.h0;
  config.h_min = opts.h_min;
  config.phi_min = opts.phi_min;
  config.beta = opts.beta;
  config.delta = opts.delta;
  config.candidate_count = opts.candidates;
  config.medium = Medium{opts.mu, opts.eps};

  return LoadedProblem{std::move(fixture), ref, std::move(space),
                       std::move(provider), config,
                       file_checksum_hex(opts.geometry)};
}

std::vector<int> parse_mode_list(const std::string& text) {
  std::vector<int> modes;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int j = lo; j <= hi; ++j) modes.push_back(j);
  } else {
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) modes.push_back(std::stoi(tok));
  }
  if (modes.empty()) throw CLI::ValidationError("--modes", "empty mode list");
  return modes;
}

std::string path_csv(const TrackedPath& path) {
  std::string csv = "t,f\n";
  for (const TrackRecord& rec : path.records)
    csv += format_double(rec.t) + "," + format_double(rec.freq) + "\n";
  return csv;
}

json warnings_json(const TrackedPath& path) {
  json arr = json::array();
  for (const TrackWarning& w : path.warnings)
    arr.push_back({{"t", w.t}, {"message", w.message}});
  return arr;
}

json config_json(const TrackerConfig& c) {
  return {{"h0", c.h0},          {"h_min", c.h_min},
          {"phi_min", c.phi_min}, {"beta", c.beta},
          {"delta", c.delta},     {"t_start", c.t_start},
          {"t_end", c.t_end},     {"candidate_count", c.candidate_count},
          {"mu", c.medium.mu},    {"eps", c.medium.eps}};
}

void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command, const CommonOpts& opts,
                    const TrackerConfig& config, const json& selection,
                    const std::string& checksum,
                    const std::vector<std::string>& outputs) {
  json doc{{"command", command},
           {"geometry", opts.geometry},
           {"fixture_checksum_fnv1a64", checksum},
           {"homotopy", opts.homotopy},
           {"selection", selection},
           {"config", config_json(config)},
           {"refine", opts.refine},
           {"quad", opts.quad},
           {"rel_tol", opts.rel_tol},
           {"out", opts.out_dir},
           {"outputs", outputs}};
  write_file_atomic(out_dir / "manifest.json", doc.dump(2) + "\n");
}

std::string label_slug(const ModeLabel& label) {
  std::string s = to_string(label.family) + "-" + std::to_string(label.m) +
                  "-" + std::to_string(label.n) + "-" + std::to_string(label.p);
  if (label.m >= 1) s += "-p" + std::to_string(label.polarization);
  return s;
}

int run_identify(const CommonOpts& opts, const std::string& modes_text) {
  const std::vector<int> modes = parse_mode_list(modes_text);
  LoadedProblem problem = load_problem(opts);
  problem.config.t_start = 0.0;
  problem.config.t_end = 1.0;

  log_line("tracking " + std::to_string(modes.size()) + " modes (" +
           opts.homotopy + ")");
  const std::vector<TrackedPath> paths =
      track_many(problem.config, *problem.provider, modes);

  const int spectrum_count =
      *std::max_element(modes.begin(), modes.end()) + 12;
  const AnalyticSpectrum reference =
      disk_spectrum_2d(problem.reference.radius, problem.reference.bc,
                       spectrum_count, problem.config.medium);

  // Within a degenerate cluster, the mode arriving on the smaller candidate
  // index takes polarization slot 0; this keeps identify/explore consistent.
  std::map<int, std::vector<int>> by_final;  // final candidate -> path ids

  json labels;
  json all_warnings = json::array();
  std::vector<std::pair<std::string, std::string>> files;

  std::vector<Classification> classes(paths.size());
  for (size_t i = 0; i < paths.size(); ++i) {
    classes[i] = classify(paths[i].records.back().freq, reference,
                          problem.reference.rel_tol);
  }
  // Assign polarization slots per cluster by final candidate order.
  for (size_t i = 0; i < paths.size(); ++i) {
    if (classes[i].label.m < 1) continue;
    std::vector<size_t> cluster;
    for (size_t k = 0; k < paths.size(); ++k)
      if (classes[k].label.same_cluster(classes[i].label)) cluster.push_back(k);
    std::sort(cluster.begin(), cluster.end(), [&](size_t a, size_t b) {
      return paths[a].final_candidate < paths[b].final_candidate;
    });
    for (size_t slot = 0; slot < cluster.size(); ++slot)
      classes[cluster[slot]].label.polarization =
          static_cast<int>(std::min<size_t>(slot, 1));
  }

  for (size_t i = 0; i < paths.size(); ++i) {
    const TrackedPath& path = paths[i];
    const Classification& cls = classes[i];
    const std::string name = "mode_" + std::to_string(path.mode_index) + "_" +
                             opts.homotopy + ".csv";
    files.emplace_back(name, path_csv(path));

    json entry{{"family", to_string(cls.label.family)},
               {"m", cls.label.m},
               {"n", cls.label.n},
               {"p", cls.label.p},
               {"polarization", cls.label.polarization},
               {"polarization_resolved", cls.polarization_resolved},
               {"freq_end", path.records.back().freq},
               {"lambda_end", path.records.back().lambda},
               {"classification_rel_err", cls.rel_err},
               {"phi_min_seen", path.phi_min_seen},
               {"warnings", warnings_json(path)}};
    labels[std::to_string(path.mode_index)] = entry;
    for (const TrackWarning& w : path.warnings)
      all_warnings.push_back(
          {{"mode", path.mode_index}, {"t", w.t}, {"message", w.message}});
    by_final[path.final_candidate].push_back(static_cast<int>(i));
  }

  const std::filesystem::path out_dir(opts.out_dir);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> names;
  for (auto& [name, content] : files) {
    write_file_atomic(out_dir / name, content);
    names.push_back(name);
  }
  write_file_atomic(out_dir / "labels.json", labels.dump(2) + "\n");
  names.push_back("labels.json");
  write_file_atomic(out_dir / "warnings.json", all_warnings.dump(2) + "\n");
  names.push_back("warnings.json");
  write_manifest(out_dir, "identify", opts, problem.config, json(modes_text),
                 problem.checksum, names);

  for (size_t i = 0; i < paths.size(); ++i)
    std::cout << "mode " << paths[i].mode_index << " -> "
              << to_string(classes[i].label)
              << " (f_end = " << paths[i].records.back().freq << " Hz, "
              << paths[i].warnings.size() << " warnings)\n";
  return 0;
}

int run_explore(const CommonOpts& opts, const std::string& label_text) {
  const ModeLabel label = parse_mode_label(label_text);
  LoadedProblem problem = load_problem(opts);
  problem.config.t_start = 1.0;
  problem.config.t_end = 0.0;

  const int spectrum_count = 64;
  const AnalyticSpectrum reference =
      disk_spectrum_2d(problem.reference.radius, problem.reference.bc,
                       spectrum_count, problem.config.medium);

  log_line("exploring " + to_string(label) + " (" + opts.homotopy + ")");
  const TrackedPath path = explore(problem.config, *problem.provider, label,
                                   reference, problem.reference.rel_tol);

  const std::filesystem::path out_dir(opts.out_dir);
  std::filesystem::create_directories(out_dir);
  const std::string csv_name =
      "explore_" + label_slug(label) + "_" + opts.homotopy + ".csv";
  write_file_atomic(out_dir / csv_name, path_csv(path));

  const TrackRecord& end = path.records.back();
  json report{{"label", to_string(label)},
              {"t_end", end.t},
              {"lambda_end", end.lambda},
              {"freq_end", end.freq},
              {"phi_min_seen", path.phi_min_seen},
              {"warnings", warnings_json(path)}};
  const std::string report_name =
      "explore_" + label_slug(label) + "_" + opts.homotopy + ".json";
  write_file_atomic(out_dir / report_name, report.dump(2) + "\n");
  write_manifest(out_dir, "explore", opts, problem.config, json(label_text),
                 problem.checksum, {csv_name, report_name});

  std::cout << to_string(label) << " at t=0: lambda = " << end.lambda
            << ", f = " << end.freq << " Hz\n";
  return 0;
}

int run_crossing(double d, const std::string& label_a_text,
                 const std::string& label_b_text, double r_min, double r_max,
                 int samples, const std::string& out_dir_text, double mu,
                 double eps) {
  const ModeLabel a = parse_mode_label(label_a_text);
  const ModeLabel b = parse_mode_label(label_b_text);
  const Medium medium{mu, eps};

  const double r_star = crossing_radius(d, a, b, medium);
  if (r_star < r_min || r_star > r_max)
    throw std::runtime_error("no crossing in the requested radius range");

  std::string csv = "R,f_a,f_b\n";
  for (int i = 0; i < samples; ++i) {
    const double r =
        r_min + (r_max - r_min) * static_cast<double>(i) / (samples - 1);
    PillboxSpec spec{r, d, medium};
    csv += format_double(r) + "," +
           format_double(pillbox_freq(spec, a).freq) + "," +
           format_double(pillbox_freq(spec, b).freq) + "\n";
  }
  PillboxSpec at_star{r_star, d, medium};
  json report{{"label_a", to_string(a)},
              {"label_b", to_string(b)},
              {"d", d},
              {"crossing_radius", r_star},
              {"freq_at_crossing", pillbox_freq(at_star, a).freq}};

  const std::filesystem::path out_dir(out_dir_text);
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "crossing.csv", csv);
  write_file_atomic(out_dir / "crossing.json", report.dump(2) + "\n");

  std::cout << "crossing of " << to_string(a) << " and " << to_string(b)
            << " at R = " << r_star << " m\n";
  return 0;
}

int run_spectrum(const std::optional<double>& pillbox_radius, double pillbox_d,
                 double f_max, const std::optional<double>& disk_radius,
                 const std::string& bc_text, int count,
                 const std::string& out_dir_text, double mu, double eps) {
  const Medium medium{mu, eps};
  AnalyticSpectrum spectrum;
  if (pillbox_radius) {
    PillboxSpec spec{*pillbox_radius, pillbox_d, medium};
    spectrum = pillbox_spectrum(spec, f_max);
    if (spectrum.entries.empty())
      std::cerr << "warning: f_max below the lowest admissible mode\n";
  } else if (disk_radius) {
    const BoundaryCondition bc = bc_text == "neumann"
                                     ? BoundaryCondition::Neumann
                                     : BoundaryCondition::Dirichlet;
    spectrum = disk_spectrum_2d(*disk_radius, bc, count, medium);
  } else {
    throw CLI::ValidationError("spectrum",
                               "need --pillbox-radius or --disk-radius");
  }

  std::string csv = "family,m,n,p,freq_hz\n";
  for (const SpectrumEntry& e : spectrum.entries)
    csv += to_string(e.label.family) + "," + std::to_string(e.label.m) + "," +
           std::to_string(e.label.n) + "," + std::to_string(e.label.p) + "," +
           format_double(e.freq) + "\n";

  const std::filesystem::path out_dir(out_dir_text);
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "spectrum.csv", csv);
  std::cout << spectrum.entries.size() << " modes written\n";
  return 0;
}

int run_field(const CommonOpts& opts, double t, int mode, int grid) {
  if (grid < 2) throw CLI::ValidationError("--grid", "grid must be >= 2");
  LoadedProblem problem = load_problem(opts);

  const MatrixPencil pencil =
      assemble_pencil(problem.fixture.morph, t, problem.space, opts.quad);
  const std::vector<Eigenpair> pairs =
      solve_gevp(pencil, mode, problem.config.medium);
  const Eigenpair& pair = pairs.back();

  const std::vector<FieldSample> samples =
      eval_field(problem.space, problem.fixture.morph, t, pair.e, grid);

  std::string csv = "x,y,magnitude\n";
  for (const FieldSample& s : samples)
    csv += format_double(s.x) + "," + format_double(s.y) + "," +
           format_double(s.magnitude) + "\n";

  const std::filesystem::path out_dir(opts.out_dir);
  std::filesystem::create_directories(out_dir);
  const std::string name = "field_mode" + std::to_string(mode) + "_t" +
                           format_double(t) + ".csv";
  write_file_atomic(out_dir / name, csv);
  write_manifest(out_dir, "field", opts, problem.config,
                 json{{"t", t}, {"mode", mode}, {"grid", grid}},
                 problem.checksum, {name});
  std::cout << name << ": " << samples.size() << " samples, lambda = "
            << pair.lambda << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "modetrack: eigenmode classification by shape morphing and "
      "eigenvalue tracking"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* identify = app.add_subcommand(
      "identify", "track modes from the start shape to the disk and label them");
  std::string modes_text = "1..6";
  add_tracker_flags(identify, opts);
  identify->add_option("--modes", modes_text, "mode indices, e.g. 1..6 or 1,3");

  auto* explore_cmd = app.add_subcommand(
      "explore", "track one labeled disk mode back to the start shape");
  std::string label_text;
  add_tracker_flags(explore_cmd, opts);
  explore_cmd->add_option("--label", label_text, "mode label, e.g. \"TM 0 1 0\"")
      ->required();

  auto* crossing_cmd =
      app.add_subcommand("crossing", "analytic frequency curves and crossing");
  double cr_d = 0.1, cr_rmin = 0.04, cr_rmax = 0.06;
  double cr_mu = vacuum_mu, cr_eps = vacuum_eps;
  int cr_samples = 101;
  std::string cr_a, cr_b, cr_out = ".";
  crossing_cmd->add_option("--d", cr_d, "pillbox length [m]")->required();
  crossing_cmd->add_option("--label-a", cr_a, "first label")->required();
  crossing_cmd->add_option("--label-b", cr_b, "second label")->required();
  crossing_cmd->add_option("--r-min", cr_rmin, "radius range start [m]");
  crossing_cmd->add_option("--r-max", cr_rmax, "radius range end [m]");
  crossing_cmd->add_option("--samples", cr_samples, "curve sample count");
  crossing_cmd->add_option("--out", cr_out, "output directory");
  crossing_cmd->add_option("--mu", cr_mu, "permeability [H/m]");
  crossing_cmd->add_option("--eps", cr_eps, "permittivity [F/m]");

  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "closed-form reference spectrum CSV");
  std::optional<double> sp_pillbox_r, sp_disk_r;
  double sp_d = 1.0, sp_fmax = 0.0, sp_mu = vacuum_mu, sp_eps = vacuum_eps;
  int sp_count = 10;
  std::string sp_bc = "dirichlet", sp_out = ".";
  spectrum_cmd->add_option("--pillbox-radius", sp_pillbox_r, "pillbox R [m]");
  spectrum_cmd->add_option("--pillbox-length", sp_d, "pillbox d [m]");
  spectrum_cmd->add_option("--f-max", sp_fmax, "enumeration cutoff [Hz]");
  spectrum_cmd->add_option("--disk-radius", sp_disk_r, "2D disk R [m]");
  spectrum_cmd->add_option("--bc", sp_bc, "disk boundary: dirichlet|neumann")
      ->check(CLI::IsMember({"dirichlet", "neumann"}));
  spectrum_cmd->add_option("--count", sp_count, "number of disk modes");
  spectrum_cmd->add_option("--out", sp_out, "output directory");
  spectrum_cmd->add_option("--mu", sp_mu, "permeability [H/m]");
  spectrum_cmd->add_option("--eps", sp_eps, "permittivity [F/m]");

  auto* field_cmd =
      app.add_subcommand("field", "sample a mode's field magnitude at t");
  double fd_t = 0.0;
  int fd_mode = 1, fd_grid = 64;
  add_tracker_flags(field_cmd, opts);
  field_cmd->add_option("--t", fd_t, "morph parameter in [0,1]");
  field_cmd->add_option("--mode", fd_mode, "mode index (1-based)");
  field_cmd->add_option("--grid", fd_grid, "samples per direction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (identify->parsed()) return run_identify(opts, modes_text);
    if (explore_cmd->parsed()) return run_explore(opts, label_text);
    if (crossing_cmd->parsed())
      return run_crossing(cr_d, cr_a, cr_b, cr_rmin, cr_rmax, cr_samples,
                          cr_out, cr_mu, cr_eps);
    if (spectrum_cmd->parsed())
      return run_spectrum(sp_pillbox_r, sp_d, sp_fmax, sp_disk_r, sp_bc,
                          sp_count, sp_out, sp_mu, sp_eps);
    if (field_cmd->parsed()) return run_field(opts, fd_t, fd_mode, fd_grid);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
