#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pairmrf/estimators.hpp"
#include "pairmrf/exact.hpp"
#include "pairmrf/field_io.hpp"
#include "pairmrf/hmrf.hpp"
#include "pairmrf/kernel.hpp"
#include "pairmrf/render.hpp"
#include "pairmrf/report.hpp"
#include "pairmrf/rng.hpp"
#include "pairmrf/sampler.hpp"

namespace fs = std::filesystem;

namespace pairmrf::cli {

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << "subcommand=" << manifest.subcommand << '\n';
  out << "version=" << manifest.version << '\n';
  out << "seed=" << manifest.seed << '\n';
  for (std::size_t i = 0; i < manifest.args.size(); ++i) out << "arg." << i << '=' << manifest.args[i] << '\n';
  for (std::size_t i = 0; i < manifest.outputs.size(); ++i) {
    out << "output." << i << '=' << manifest.outputs[i] << '\n';
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", manifest.duration_seconds);
  out << "duration_seconds=" << buf << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  Manifest m;
  std::map<std::size_t, std::string> args;
  std::map<std::size_t, std::string> outputs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed manifest line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "subcommand") {
      m.subcommand = value;
    } else if (key == "version") {
      m.version = value;
    } else if (key == "seed") {
      m.seed = std::stoull(value);
    } else if (key == "duration_seconds") {
      m.duration_seconds = std::stod(value);
    } else if (key.rfind("arg.", 0) == 0) {
      args[std::stoul(key.substr(4))] = value;
    } else if (key.rfind("output.", 0) == 0) {
      outputs[std::stoul(key.substr(7))] = value;
    }
  }
  for (auto& [i, v] : args) m.args.push_back(v);
  for (auto& [i, v] : outputs) m.outputs.push_back(v);
  if (m.args.empty()) throw std::runtime_error("manifest has no arguments");
  return m;
}

namespace {

/// Raised for malformed flag values; maps to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + p + "'");
    }
  }
  return out;
}

std::pair<int, int> parse_int_pair(const std::string& s, const std::string& what) {
  const auto v = parse_doubles(s);
  if (v.size() != 2 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1])) {
    throw UsageError(what + " expects two integers 'a,b', got '" + s + "'");
  }
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

Dims parse_dims(const std::string& s) {
  const auto [rows, cols] = parse_int_pair(s, "--dims");
  if (rows <= 0 || cols <= 0) throw UsageError("--dims must be positive");
  return {rows, cols};
}

/// "norm:<type>:<value>" or a structure file, plus any --pos extras.
std::optional<InteractionStructure> parse_structure(const std::string& spec, const std::vector<std::string>& pos) {
  std::vector<Offset> extra;
  for (const auto& p : pos) {
    const auto [r1, r2] = parse_int_pair(p, "--pos");
    extra.push_back({r1, r2});
  }
  if (spec.empty()) {
    if (extra.empty()) return std::nullopt;
    return InteractionStructure(extra);
  }
  if (spec.rfind("norm:", 0) == 0) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("--mrfi expects norm:<type>:<value>");
    const auto value = parse_doubles(parts[2]);
    if (value.size() != 1) throw UsageError("--mrfi norm value must be a single number");
    return build_structure(value[0], parse_norm_type(parts[1]), extra);
  }
  std::ifstream in(spec);
  if (!in) throw std::runtime_error("cannot open structure file " + spec);
  InteractionStructure base = read_structure(in);
  return extra.empty() ? base : unite(base, InteractionStructure(extra));
}

/// Model-spec file, or inline "family:v1,v2,...".
PotentialArray parse_theta(const std::string& spec, int max_label, const std::optional<InteractionStructure>& structure) {
  if (spec.empty()) throw UsageError("--theta is required");
  if (fs::exists(spec)) {
    std::ifstream in(spec);
    return read_model_spec(in).to_array(structure);
  }
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("--theta is neither a file nor 'family:values': " + spec);
  if (!structure) throw UsageError("inline --theta needs an interaction structure (--mrfi or --pos)");
  const Family family = parse_family(spec.substr(0, colon));
  const auto values = parse_doubles(spec.substr(colon + 1));
  return expand_array(values, family, *structure, max_label);
}

InteractionStructure require_structure(const std::optional<InteractionStructure>& s) {
  if (!s) throw UsageError("an interaction structure is required (--mrfi or --pos)");
  return *s;
}

std::vector<double> parse_gamma(const std::string& spec, const std::string& file) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open gamma file " + file);
    std::vector<double> out;
    double v = 0;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::runtime_error("gamma file has a non-numeric entry");
    return out;
  }
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--gamma expects from:to:length");
  const auto from = parse_doubles(parts[0]);
  const auto to = parse_doubles(parts[1]);
  const auto len = parse_doubles(parts[2]);
  if (len[0] < 1 || len[0] != std::floor(len[0])) throw UsageError("--gamma length must be a positive integer");
  return linear_sequence(from[0], to[0], static_cast<int>(len[0]));
}

bool is_real_path(const fs::path& p) { return p.extension() == ".csv"; }

fs::path with_suffix(const fs::path& base, const std::string& suffix) { return fs::path(base.string() + suffix); }

fs::path png_beside(const fs::path& out) {
  fs::path png = out;
  png.replace_extension(".png");
  return png == out ? with_suffix(out, ".png") : png;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_spec(const PotentialArray& theta, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_model_spec(theta, out);
}

void write_metrics(const MrfFit& fit, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,distance\n";
  char buf[64];
  for (const auto& m : fit.metrics) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", m.iteration, m.distance);
    out << buf;
  }
}

void write_cohist(const CooccurrenceHistogram& hist, std::ostream& out) {
  out << "a,b,r1,r2,count\n";
  for (std::size_t k = 0; k < hist.structure().size(); ++k) {
    const Offset r = hist.structure()[k];
    for (int a = 0; a < hist.num_colors(); ++a) {
      for (int b = 0; b < hist.num_colors(); ++b) {
        out << a << ',' << b << ',' << r.row << ',' << r.col << ',' << hist(k, a, b) << '\n';
      }
    }
  }
}

std::optional<BasisSet> parse_basis(const std::string& spec, Dims dims) {
  if (spec.empty() || spec == "none") return std::nullopt;
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("--basis expects poly:d1,d2, fourier:k1,k2 or none");
  const std::string kind = spec.substr(0, colon);
  const auto [a, b] = parse_int_pair(spec.substr(colon + 1), "--basis");
  if (kind == "poly") return polynomial_basis(a, b, dims);
  if (kind == "fourier") return fourier_basis(a, b, dims);
  throw UsageError("unknown basis kind '" + kind + "'");
}

void write_params(const HmrfFit& fit, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "component,mu,sigma\n";
  char buf[96];
  for (std::size_t k = 0; k < fit.params.mu.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, fit.params.mu[k], fit.params.sigma[k]);
    out << buf;
  }
}

/// Everything a subcommand handler needs besides its own flags.
struct Context {
  std::ostream& out;
  std::uint64_t seed;
  int threads;
  std::vector<std::string> outputs;

  void record(const fs::path& p) { outputs.push_back(p.string()); }
};

/// Writes the HMRF outputs under a common prefix.
void save_hmrf(Context& ctx, const HmrfFit& fit, const fs::path& prefix) {
  write_params(fit, with_suffix(prefix, ".params.csv"));
  save_discrete_field(fit.z_pred, with_suffix(prefix, ".zpred.txt"));
  save_real_field(fit.fixed, with_suffix(prefix, ".fixed.csv"));
  save_real_field(fit.predicted, with_suffix(prefix, ".predicted.csv"));
  write_text(with_suffix(prefix, ".summary.txt"), summary_report(fit));
  for (const char* s : {".params.csv", ".zpred.txt", ".fixed.csv", ".predicted.csv", ".summary.txt"}) {
    ctx.record(with_suffix(prefix, s));
  }
}

struct Flags {
  // shared
  std::string mrfi;
  std::vector<std::string> pos;
  std::string theta;
  int max_label = 1;
  std::string family = "oneeach";
  std::string out;
  // sample
  std::string dims;
  std::string init;
  int cycles = 60;
  std::string fixed;
  std::string sub;
  std::string png;
  std::string palette = "gray";
  // fitting
  std::string z;
  double gtol = 1e-5;
  int max_iter = 500;
  std::string gamma = "1:0:300";
  std::string gamma_file;
  int sa_cycles = 2;
  int refresh_each = 0;
  int refresh_cycles = 60;
  std::string metrics;
  double threshold = 0.1;
  // fit-ghm
  std::string y;
  std::string basis = "none";
  bool equal_vars = false;
  int ghm_maxiter = 100;
  double max_dist = 1e-3;
  int icm_cycles = 6;
  // mrfi / render / oracle / demo / replay
  std::string mrfi_spec;
  bool count = false;
  std::vector<std::string> inputs;
  bool mle = false;
  std::string demo;
  std::string out_dir;
  std::string manifest_path;
};

SaOptions sa_options(const Flags& f, std::uint64_t seed) {
  SaOptions o;
  o.gamma_seq = parse_gamma(f.gamma, f.gamma_file);
  o.cycles = f.sa_cycles;
  o.refresh_each = f.refresh_each;
  o.refresh_cycles = f.refresh_cycles;
  o.seed = seed;
  return o;
}

void cmd_sample(Context& ctx, const Flags& f) {
  if (f.out.empty()) throw UsageError("--out is required");
  if (f.dims.empty() == f.init.empty()) throw UsageError("give exactly one of --dims and --init");
  const auto structure = parse_structure(f.mrfi, f.pos);
  const PotentialArray theta = parse_theta(f.theta, f.max_label, structure);
  SamplerConfig cfg;
  cfg.cycles = f.cycles;
  cfg.seed = derive_seed(ctx.seed, 0);
  if (!f.fixed.empty()) cfg.fixed_region = load_region(f.fixed);
  if (!f.sub.empty()) cfg.sub_region = load_region(f.sub);
  const DiscreteField z = f.init.empty() ? sample_mrf(parse_dims(f.dims), theta, cfg)
                                         : sample_mrf(load_discrete_field(f.init), theta, cfg);
  save_discrete_field(z, f.out);
  ctx.record(f.out);
  const fs::path png = f.png.empty() ? png_beside(f.out) : fs::path(f.png);
  write_png(render_field(z, parse_palette(f.palette)), png);
  ctx.record(png);
}

void cmd_fit_pl(Context& ctx, const Flags& f) {
  if (f.z.empty()) throw UsageError("--z is required");
  const DiscreteField z = load_discrete_field(f.z);
  const InteractionStructure structure = require_structure(parse_structure(f.mrfi, f.pos));
  PlOptions o;
  o.gtol = f.gtol;
  o.max_iterations = f.max_iter;
  o.threads = ctx.threads;
  const MrfFit fit = fit_pl(z, structure, parse_family(f.family), o);
  ctx.out << summary_report(fit);
  if (!f.out.empty()) {
    write_spec(fit.theta, f.out);
    ctx.record(f.out);
  }
}

void cmd_fit_sa(Context& ctx, const Flags& f) {
  if (f.z.empty()) throw UsageError("--z is required");
  const DiscreteField z = load_discrete_field(f.z);
  const InteractionStructure structure = require_structure(parse_structure(f.mrfi, f.pos));
  const MrfFit fit = fit_sa(z, structure, parse_family(f.family), sa_options(f, derive_seed(ctx.seed, 0)));
  ctx.out << summary_report(fit);
  if (!f.out.empty()) {
    write_spec(fit.theta, f.out);
    ctx.record(f.out);
    const fs::path metrics = f.metrics.empty() ? with_suffix(f.out, ".metrics.csv") : fs::path(f.metrics);
    write_metrics(fit, metrics);
    ctx.record(metrics);
  }
}

void cmd_select(Context& ctx, const Flags& f) {
  if (f.z.empty()) throw UsageError("--z is required");
  const DiscreteField z = load_discrete_field(f.z);
  const InteractionStructure candidates = require_structure(parse_structure(f.mrfi, f.pos));
  const Selection sel =
      select_interactions(z, candidates, parse_family(f.family), sa_options(f, derive_seed(ctx.seed, 0)), f.threshold);
  ctx.out << sel.structure.size() << " interacting positions selected:";
  for (const Offset r : sel.structure.positions()) ctx.out << ' ' << to_string(r);
  ctx.out << '\n';
  if (!f.out.empty()) {
    std::ofstream s(f.out);
    if (!s) throw std::runtime_error("cannot write " + f.out);
    write_structure(sel.structure, s);
    s.close();
    ctx.record(f.out);
    write_spec(sel.fit.theta, with_suffix(f.out, ".candidates.spec"));
    ctx.record(with_suffix(f.out, ".candidates.spec"));
  }
}

void cmd_cohist(Context& ctx, const Flags& f) {
  if (f.z.empty()) throw UsageError("--z is required");
  const DiscreteField z = load_discrete_field(f.z);
  const InteractionStructure structure = require_structure(parse_structure(f.mrfi, f.pos));
  const auto hist = cohist(z, structure);
  if (f.out.empty()) {
    write_cohist(hist, ctx.out);
    return;
  }
  std::ofstream out(f.out);
  if (!out) throw std::runtime_error("cannot write " + f.out);
  write_cohist(hist, out);
  out.close();
  ctx.record(f.out);
}

void cmd_mrfi(Context& ctx, const Flags& f) {
  const auto structure = require_structure(parse_structure(f.mrfi_spec, f.pos));
  if (f.count) {
    ctx.out << structure.size() << '\n';
  } else {
    write_structure(structure, ctx.out);
  }
  if (!f.out.empty()) {
    std::ofstream out(f.out);
    if (!out) throw std::runtime_error("cannot write " + f.out);
    write_structure(structure, out);
    out.close();
    ctx.record(f.out);
  }
}

void cmd_render(Context& ctx, const Flags& f) {
  if (f.inputs.empty()) throw UsageError("at least one --in is required");
  if (f.out.empty()) throw UsageError("--out is required");
  const Palette palette = parse_palette(f.palette);
  std::vector<Image> images;
  for (const auto& in : f.inputs) {
    if (is_real_path(in)) {
      images.push_back(render_field(load_real_field(in), palette == Palette::Categorical ? Palette::Gray : palette));
    } else {
      images.push_back(render_field(load_discrete_field(in), palette));
    }
  }
  write_png(images.size() == 1 ? images[0] : hconcat(images), f.out);
  ctx.record(f.out);
}

void cmd_fit_ghm(Context& ctx, const Flags& f) {
  if (f.y.empty()) throw UsageError("--y is required");
  const RealField y = load_real_field(f.y);
  const auto structure = parse_structure(f.mrfi, f.pos);
  const PotentialArray theta = parse_theta(f.theta, f.max_label, structure);
  GhmOptions o;
  o.equal_vars = f.equal_vars;
  o.maxiter = f.ghm_maxiter;
  o.max_dist = f.max_dist;
  o.icm_cycles = f.icm_cycles;
  const HmrfFit fit = fit_ghm(y, theta, parse_basis(f.basis, y.dims()), o);
  ctx.out << summary_report(fit);
  if (!f.out.empty()) save_hmrf(ctx, fit, f.out);
}

void cmd_oracle(Context& ctx, const Flags& f) {
  const auto structure = parse_structure(f.mrfi, f.pos);
  char buf[64];
  auto print_vec = [&](const char* name, const std::vector<double>& v) {
    ctx.out << name;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.10g", x);
      ctx.out << buf;
    }
    ctx.out << '\n';
  };
  if (f.mle) {
    if (f.z.empty()) throw UsageError("--mle needs --z");
    const DiscreteField z = load_discrete_field(f.z);
    print_vec("mle", exact_mle(z, require_structure(structure), parse_family(f.family)));
    return;
  }
  const PotentialArray theta = parse_theta(f.theta, f.max_label, structure);
  const Dims dims = parse_dims(f.dims);
  const ExactModel model(dims, theta);
  std::snprintf(buf, sizeof buf, "%.12g", model.log_partition());
  ctx.out << "log_partition " << buf << '\n';
  print_vec("expected_stats", model.expected_stats());
}

/// Latent oneeach texture used by the demos.
PotentialArray texture_model() {
  return expand_array(std::vector<double>{-1.0, -1.0, 0.2}, Family::OneEach,
                      InteractionStructure({{1, 0}, {0, 1}, {4, 4}}), 1);
}

RealField emit(const DiscreteField& z, const std::vector<double>& mu, const std::vector<double>& sigma,
               const std::vector<double>& trend, Rng& rng) {
  std::vector<double> y(z.dims().size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Box-Muller from our own generator keeps the stream portable.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    const auto k = static_cast<std::size_t>(z[i]);
    y[i] = mu[k] + sigma[k] * g + (trend.empty() ? 0.0 : trend[i]);
  }
  return RealField(z.dims(), std::move(y));
}

void demo_texture(Context& ctx, const fs::path& dir) {
  const PotentialArray truth = texture_model();
  SamplerConfig cfg;
  cfg.cycles = 60;
  cfg.seed = derive_seed(ctx.seed, 0);
  const DiscreteField z = sample_mrf(Dims{150, 150}, truth, cfg);
  save_discrete_field(z, dir / "observed.txt");
  ctx.record(dir / "observed.txt");

  SaOptions sa;
  sa.seed = derive_seed(ctx.seed, 1);
  const Selection sel = select_interactions(z, build_structure(6, NormType::Linf), Family::OneEach, sa, 0.1);
  ctx.out << "selected:";
  for (const Offset r : sel.structure.positions()) ctx.out << ' ' << to_string(r);
  ctx.out << '\n';

  PlOptions pl;
  pl.threads = ctx.threads;
  const MrfFit fit = fit_pl(z, sel.structure, Family::OneEach, pl);
  ctx.out << summary_report(fit);
  write_spec(fit.theta, dir / "fitted.spec");
  ctx.record(dir / "fitted.spec");

  cfg.seed = derive_seed(ctx.seed, 2);
  const DiscreteField resampled = sample_mrf(Dims{150, 150}, fit.theta, cfg);
  save_discrete_field(resampled, dir / "resampled.txt");
  ctx.record(dir / "resampled.txt");
  const std::vector<Image> panels{render_field(z), render_field(resampled)};
  write_png(hconcat(panels), dir / "texture.png");
  ctx.record(dir / "texture.png");
}

void demo_hmrf(Context& ctx, const fs::path& dir) {
  const PotentialArray theta = texture_model();
  const Dims dims{150, 150};
  SamplerConfig cfg;
  cfg.seed = derive_seed(ctx.seed, 0);
  const DiscreteField z = sample_mrf(dims, theta, cfg);
  // Smooth trend plus component means.
  const BasisSet trend_basis = polynomial_basis(2, 2, dims);
  std::vector<double> trend(dims.size(), 0.0);
  const std::vector<double> coef{0.8, -0.5, 0.6, 0.3, 0.0, -0.4, 0.2, 0.0};
  for (std::size_t j = 0; j < trend_basis.size(); ++j) {
    for (std::size_t i = 0; i < trend.size(); ++i) trend[i] += coef[j] * trend_basis(j, i);
  }
  Rng rng(derive_seed(ctx.seed, 1));
  const RealField y = emit(z, {5.0, 9.0}, {1.2, 1.2}, trend, rng);
  save_real_field(y, dir / "y.csv");
  ctx.record(dir / "y.csv");

  const HmrfFit plain = fit_ghm(y, theta);
  const HmrfFit trended = fit_ghm(y, theta, polynomial_basis(3, 3, dims));
  ctx.out << summary_report(plain) << '\n' << summary_report(trended);
  save_hmrf(ctx, plain, dir / "nofixed");
  save_hmrf(ctx, trended, dir / "poly33");
  const std::vector<Image> panels{render_field(y), render_field(plain.z_pred), render_field(trended.z_pred),
                                  render_field(trended.fixed)};
  write_png(hconcat(panels), dir / "hmrf.png");
  ctx.record(dir / "hmrf.png");
}

void demo_segmentation(Context& ctx, const fs::path& dir) {
  const InteractionStructure nn({{1, 0}, {0, 1}});
  const PotentialArray theta = expand_array(std::vector<double>{-1.0}, Family::OnePar, nn, 3);
  const Dims dims{128, 128};
  SamplerConfig cfg;
  cfg.seed = derive_seed(ctx.seed, 0);
  const DiscreteField z = sample_mrf(dims, theta, cfg);
  Rng rng(derive_seed(ctx.seed, 1));
  const RealField y = emit(z, {40.0, 90.0, 140.0, 190.0}, {28.0, 28.0, 28.0, 28.0}, {}, rng);
  save_real_field(y, dir / "y.csv");
  ctx.record(dir / "y.csv");
  GhmOptions o;
  o.equal_vars = true;
  const HmrfFit fit = fit_ghm(y, theta, std::nullopt, o);
  ctx.out << summary_report(fit);
  save_hmrf(ctx, fit, dir / "segmentation");
  const std::vector<Image> panels{render_field(y), render_field(fit.z_pred, Palette::Categorical)};
  write_png(hconcat(panels), dir / "segmentation.png");
  ctx.record(dir / "segmentation.png");
}

void cmd_demo(Context& ctx, const Flags& f) {
  const fs::path dir = f.out_dir.empty() ? fs::path("demo-" + f.demo) : fs::path(f.out_dir);
  fs::create_directories(dir);
  if (f.demo == "texture") {
    demo_texture(ctx, dir);
  } else if (f.demo == "hmrf") {
    demo_hmrf(ctx, dir);
  } else if (f.demo == "segmentation") {
    demo_segmentation(ctx, dir);
  } else {
    throw UsageError("unknown demo '" + f.demo + "' (texture, hmrf, segmentation)");
  }
}

/// Where the manifest of a run goes: the explicit path, else next to the
/// first output.
std::optional<fs::path> manifest_location(const Flags& f, const std::string& sub, const Context& ctx) {
  if (!f.manifest_path.empty()) return fs::path(f.manifest_path);
  if (sub == "demo") {
    return (f.out_dir.empty() ? fs::path("demo-" + f.demo) : fs::path(f.out_dir)) / "manifest.txt";
  }
  if (ctx.outputs.empty()) return std::nullopt;
  return with_suffix(ctx.outputs.front(), ".manifest");
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_impl(args, out, err, 0);
}

namespace {

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Pairwise-interaction Markov random fields on 2-d lattices", "pairmrf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;
  std::uint64_t seed = 0;
  int threads = 1;
  bool reproducible = false;
  auto* seed_opt = app.add_option("--seed", seed, "Root seed; every random stream derives from it");
  app.add_option("--threads", threads, "Worker cap for parallel evaluations")->check(CLI::PositiveNumber);
  app.add_flag("--reproducible", reproducible, "Deterministic reductions (always on; accepted for compatibility)");
  app.add_option("--manifest", f.manifest_path, "Manifest path (default: next to the first output)");

  auto structure_flags = [&](CLI::App* s) {
    s->add_option("--mrfi", f.mrfi, "Structure: norm:<L1|L2|Linf>:<value> or a structure file");
    s->add_option("--pos", f.pos, "Extra position r1,r2 (repeatable)");
  };
  auto theta_flags = [&](CLI::App* s) {
    s->add_option("--theta", f.theta, "Model-spec file or inline family:v1,v2,...");
    s->add_option("--C", f.max_label, "Maximum label for inline --theta")->check(CLI::PositiveNumber);
  };
  auto sa_flags = [&](CLI::App* s) {
    s->add_option("--gamma", f.gamma, "Step sequence from:to:length (before division by |L|)");
    s->add_option("--gamma-file", f.gamma_file, "Step sequence, one value per line");
    s->add_option("--cycles", f.sa_cycles, "Gibbs cycles per iteration");
    s->add_option("--refresh-each", f.refresh_each, "Restart the chain every n iterations (0: never)");
    s->add_option("--refresh-cycles", f.refresh_cycles, "Cycles after a restart");
  };

  auto* sample = app.add_subcommand("sample", "Draw a field with the Gibbs sampler");
  sample->add_option("--dims", f.dims, "Lattice N,M with i.i.d. uniform start");
  sample->add_option("--init", f.init, "Initial field file");
  structure_flags(sample);
  theta_flags(sample);
  sample->add_option("--cycles", f.cycles, "Number of Gibbs cycles");
  sample->add_option("--fixed", f.fixed, "Region file of pixels kept fixed");
  sample->add_option("--sub", f.sub, "Region file restricting the lattice (with --dims)");
  sample->add_option("--out", f.out, "Output field (.txt or .pgm)");
  sample->add_option("--png", f.png, "Rendered image (default: next to --out)");
  sample->add_option("--palette", f.palette, "gray, viridis or categorical");

  auto* fitpl = app.add_subcommand("fit-pl", "Maximum pseudo-likelihood fit");
  fitpl->add_option("--z", f.z, "Observed field");
  structure_flags(fitpl);
  fitpl->add_option("--family", f.family, "onepar, oneeach, absdif, dif or free");
  fitpl->add_option("--gtol", f.gtol, "Gradient tolerance");
  fitpl->add_option("--max-iter", f.max_iter, "Iteration cap");
  fitpl->add_option("--out", f.out, "Model-spec output");

  auto* fitsa = app.add_subcommand("fit-sa", "Stochastic approximation fit");
  fitsa->add_option("--z", f.z, "Observed field");
  structure_flags(fitsa);
  fitsa->add_option("--family", f.family, "onepar, oneeach, absdif, dif or free");
  sa_flags(fitsa);
  fitsa->add_option("--out", f.out, "Model-spec output");
  fitsa->add_option("--metrics", f.metrics, "Metrics CSV (default: <out>.metrics.csv)");

  auto* select = app.add_subcommand("select", "Threshold selection of interacting positions");
  select->add_option("--z", f.z, "Observed field");
  structure_flags(select);
  select->add_option("--family", f.family, "Restriction family");
  sa_flags(select);
  select->add_option("--threshold", f.threshold, "Keep positions with max |theta| above this");
  select->add_option("--out", f.out, "Structure file of the selected positions");

  auto* cohist_cmd = app.add_subcommand("cohist", "Co-occurrence histogram as CSV");
  cohist_cmd->add_option("--z", f.z, "Observed field");
  structure_flags(cohist_cmd);
  cohist_cmd->add_option("--out", f.out, "CSV output (default: stdout)");

  auto* mrfi = app.add_subcommand("mrfi", "Build and print an interaction structure");
  mrfi->add_option("spec", f.mrfi_spec, "norm:<type>:<value> or a structure file");
  mrfi->add_option("--pos", f.pos, "Extra position r1,r2 (repeatable)");
  mrfi->add_flag("--count", f.count, "Print only the number of positions");
  mrfi->add_option("--out", f.out, "Structure file output");

  auto* render = app.add_subcommand("render", "Render fields to PNG, side by side");
  render->add_option("--in", f.inputs, "Field file (.csv for real-valued); repeatable");
  render->add_option("--out", f.out, "PNG output");
  render->add_option("--palette", f.palette, "gray, viridis or categorical");

  auto* ghm = app.add_subcommand("fit-ghm", "Gaussian mixture driven by a hidden MRF");
  ghm->add_option("--y", f.y, "Observed real field (CSV)");
  structure_flags(ghm);
  theta_flags(ghm);
  ghm->add_option("--basis", f.basis, "poly:d1,d2, fourier:k1,k2 or none");
  ghm->add_flag("--equal-vars", f.equal_vars, "Force a common variance");
  ghm->add_option("--maxiter", f.ghm_maxiter, "EM iteration cap");
  ghm->add_option("--max-dist", f.max_dist, "Stop when every parameter moves less than this");
  ghm->add_option("--icm-cycles", f.icm_cycles, "ICM scans per iteration");
  ghm->add_option("--out", f.out, "Output prefix");

  auto* oracle = app.add_subcommand("oracle", "Exact computations on toy lattices");
  oracle->group("");
  oracle->add_option("--dims", f.dims, "Lattice N,M");
  structure_flags(oracle);
  theta_flags(oracle);
  oracle->add_flag("--mle", f.mle, "Exact MLE of --z instead");
  oracle->add_option("--z", f.z, "Field for --mle");
  oracle->add_option("--family", f.family, "Family for --mle");

  auto* demo = app.add_subcommand("demo", "End-to-end synthetic workflows");
  demo->add_option("name", f.demo, "texture, hmrf or segmentation")->required();
  demo->add_option("--out-dir", f.out_dir, "Output directory");

  std::string replay_path;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_path, "Manifest file")->required();

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "pairmrf: " << e.what() << '\n';
    return kUsageError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "replay") {
    if (depth > 0) {
      err << "pairmrf: a manifest cannot replay another manifest\n";
      return kUsageError;
    }
    try {
      const Manifest m = read_manifest(replay_path);
      return run_impl(m.args, out, err, depth + 1);
    } catch (const std::exception& e) {
      err << "pairmrf: replay: " << e.what() << '\n';
      return kRuntimeError;
    }
  }

  std::vector<std::string> recorded = args;
  if (seed_opt->count() == 0) {
    seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    recorded.push_back("--seed");
    recorded.push_back(std::to_string(seed));
  }
  Context ctx{out, seed, threads, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    if (name == "sample") cmd_sample(ctx, f);
    else if (name == "fit-pl") cmd_fit_pl(ctx, f);
    else if (name == "fit-sa") cmd_fit_sa(ctx, f);
    else if (name == "select") cmd_select(ctx, f);
    else if (name == "cohist") cmd_cohist(ctx, f);
    else if (name == "mrfi") cmd_mrfi(ctx, f);
    else if (name == "render") cmd_render(ctx, f);
    else if (name == "fit-ghm") cmd_fit_ghm(ctx, f);
    else if (name == "oracle") cmd_oracle(ctx, f);
    else if (name == "demo") cmd_demo(ctx, f);
    const auto where = manifest_location(f, name, ctx);
    if (where) {
      Manifest m;
      m.subcommand = name;
      m.args = recorded;
      m.seed = seed;
      m.outputs = ctx.outputs;
      m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_manifest(m, *where);
    }
  } catch (const UsageError& e) {
    err << "pairmrf " << name << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "pairmrf " << name << ": " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

}  // namespace pairmrf::cli
