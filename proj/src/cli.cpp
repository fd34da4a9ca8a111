#include "sog/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "sog/cascade.hpp"
#include "sog/errors.hpp"
#include "sog/estimators.hpp"
#include "sog/fixedpoint.hpp"
#include "sog/graph.hpp"
#include "sog/heaviest_path.hpp"
#include "sog/parallel.hpp"
#include "sog/regeneration.hpp"

namespace sog {

namespace fs = std::filesystem;

namespace {

struct ParamDef {
  std::string name;
  std::string fallback;
  std::string help;
};

class Params {
 public:
  explicit Params(ParamMap values) : values_(std::move(values)) {}

  [[nodiscard]] const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing parameter --" + key);
    return it->second;
  }
  [[nodiscard]] bool is_auto(const std::string& key) const { return str(key) == "auto"; }

  [[nodiscard]] std::int64_t i64(const std::string& key) const { return parse_number<std::int64_t>(key, str(key)); }
  [[nodiscard]] std::uint64_t u64(const std::string& key) const { return parse_number<std::uint64_t>(key, str(key)); }
  [[nodiscard]] double real(const std::string& key) const { return parse_number<double>(key, str(key)); }
  [[nodiscard]] bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ParameterError("--" + key + " expects true or false, got '" + s + "'");
  }
  [[nodiscard]] Distribution dist(const std::string& key) const { return Distribution::parse(str(key)); }
  [[nodiscard]] std::vector<std::int64_t> i64_list(const std::string& key) const {
    std::vector<std::int64_t> xs;
    std::stringstream in(str(key));
    for (std::string item; std::getline(in, item, ',');) xs.push_back(parse_number<std::int64_t>(key, item));
    if (xs.empty()) throw ParameterError("--" + key + " needs at least one value");
    return xs;
  }

  [[nodiscard]] const ParamMap& values() const { return values_; }

 private:
  template <class T>
  static T parse_number(const std::string& key, const std::string& s) {
    T x{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) throw ParameterError("--" + key + ": cannot parse '" + s + "'");
    return x;
  }

  ParamMap values_;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    std::ofstream f(dir_ / name, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ParameterError("cannot write " + (dir_ / name).string());
    files_.push_back({name, sha256_hex(content), content.size()});
  }

  [[nodiscard]] const fs::path& dir() const { return dir_; }
  [[nodiscard]] const std::vector<OutputFile>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<OutputFile> files_;
};

struct Context {
  const Params& params;
  Outputs& outputs;
  std::ostream& out;
  unsigned threads;
};

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

ModelParams model_params(const Params& p) {
  ModelParams m;
  m.p = p.real("p");
  m.du = p.dist("u");
  m.dv = p.dist("v");
  m.seed = p.u64("seed");
  return m;
}

RegenerativeOptions regen_options(const Params& p, unsigned threads) {
  RegenerativeOptions o;
  if (!p.is_auto("c")) o.c = p.real("c");
  if (!p.is_auto("margin")) o.margin = p.i64("margin");
  if (p.values().count("bootstrap")) o.bootstrap = p.i64("bootstrap");
  o.threads = threads;
  return o;
}

void cmd_generate(Context& ctx) {
  const auto& p = ctx.params;
  const auto w = generate_window(p.i64("n"), model_params(p), parse_generation_mode(p.str("mode")));
  ctx.outputs.write("window.json", to_json(w).dump(2) + "\n");
  ctx.out << "window " << w.id() << ": n=" << w.n() << " edges=" << w.edge_count() << "\n";
}

void cmd_heaviest(Context& ctx) {
  const auto& p = ctx.params;
  const auto n = p.i64("n");
  const auto w = generate_window(n, model_params(p), parse_generation_mode(p.str("mode")));
  const auto i = p.i64("i");
  const auto j = p.is_auto("j") ? n : p.i64("j");
  const auto variant = parse_variant(p.str("variant"));
  const auto pv = heaviest_between(w, i, j, variant);
  const nlohmann::json doc{{"window_id", w.id()},
                           {"i", i},
                           {"j", j},
                           {"heaviest", to_json(pv)},
                           {"window_max", window_max(w, i, j, variant)}};
  ctx.outputs.write("heaviest.json", doc.dump(2) + "\n");
  ctx.out << "w(" << i << "," << j << ") = " << (pv.reachable ? fmt(pv.w) : "unreachable") << "\n";
}

void cmd_skeleton(Context& ctx) {
  const auto& p = ctx.params;
  const auto n = p.i64("n");
  const auto prob = p.real("p");
  const auto margin = p.is_auto("margin") ? n / 4 : p.i64("margin");
  const auto reps = p.i64("reps");
  const auto d = estimate_skeleton_density(n, prob, margin, reps, p.u64("seed"), ctx.threads);
  const double oracle = skeleton_density(prob);
  std::ostringstream csv;
  csv << "n,p,margin,reps,seed,estimate,stderr,bias_bound,oracle\n"
      << n << ',' << fmt(prob) << ',' << margin << ',' << reps << ',' << p.str("seed") << ',' << fmt(d.estimate) << ','
      << fmt(d.std_error) << ',' << fmt(d.bias_bound) << ',' << fmt(oracle) << '\n';
  ctx.outputs.write("skeleton.csv", csv.str());
  ctx.out << "skeleton density " << fmt(d.estimate) << " +- " << fmt(d.std_error) << " (product formula "
          << fmt(oracle) << ")\n";
}

void cmd_renewal(Context& ctx) {
  const auto& p = ctx.params;
  const auto n = p.i64("n");
  const auto params = model_params(p);
  const double c = p.is_auto("c") ? suggest_c(n, params, ctx.threads) : p.real("c");
  const auto margin = p.is_auto("margin") ? n / 8 : p.i64("margin");
  const auto w = generate_window(n, params);
  const auto report = detect_renewal(w, c, margin);
  nlohmann::json doc{{"report", to_json(report)}};
  if (p.flag("verify")) {
    const auto check = verify_splitting(w, report);
    doc["splitting"] = {{"ok", check.ok},
                        {"violations", check.violations.size()},
                        {"triples_checked", check.triples_checked}};
  }
  const auto reps = p.i64("reps");
  if (reps > 0) {
    const auto lambda = estimate_lambda(n, params, c, reps, ctx.threads);
    doc["lambda"] = {{"estimate", lambda.estimate}, {"stderr", lambda.std_error}, {"reps", lambda.reps}};
  }
  ctx.outputs.write("renewal.json", doc.dump(2) + "\n");
  ctx.out << report.points.size() << " renewal points at c = " << fmt(c) << "\n";
}

void write_estimate(Context& ctx, const EstimateReport& r) {
  ctx.outputs.write("estimate.csv", estimate_csv_header() + "\n" + to_csv_row(r) + "\n");
  ctx.out << to_string(r.target) << " = " << fmt(r.estimate) << " (stderr " << fmt(r.std_error) << ")\n";
}

void cmd_estimate_c(Context& ctx) {
  const auto& p = ctx.params;
  write_estimate(ctx, estimate_growth_constant(p.i64("n"), model_params(p), p.i64("reps"),
                                               parse_estimator_method(p.str("method")),
                                               regen_options(p, ctx.threads)));
}

void cmd_estimate_b2(Context& ctx) {
  const auto& p = ctx.params;
  write_estimate(ctx, estimate_clt_variance(p.i64("n"), model_params(p), p.i64("reps"), regen_options(p, ctx.threads)));
}

void cmd_clt(Context& ctx) {
  const auto& p = ctx.params;
  const auto rows = clt_diagnostic(p.i64_list("n-list"), model_params(p), p.i64("reps"), regen_options(p, ctx.threads));
  std::ostringstream csv;
  csv << "n,reps,degenerate,c_hat,b2_hat,per_unit_variance,skewness,excess_kurtosis,ks_normal\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << r.reps << ',' << (r.degenerate ? "true" : "false") << ',' << fmt(r.c_hat) << ','
        << fmt(r.b2_hat) << ',' << fmt(r.per_unit_variance) << ',' << fmt(r.skewness) << ','
        << fmt(r.excess_kurtosis) << ',' << fmt(r.ks_normal) << '\n';
    ctx.out << "n=" << r.n << (r.degenerate ? " degenerate" : "") << " skew=" << fmt(r.skewness)
            << " kurt=" << fmt(r.excess_kurtosis) << " ks=" << fmt(r.ks_normal) << "\n";
  }
  ctx.outputs.write("clt.csv", csv.str());
}

void cmd_cascade(Context& ctx) {
  const auto& p = ctx.params;
  const auto du = p.dist("u");
  const auto dv = p.dist("v");
  const double horizon = p.real("horizon");
  const auto seed = p.u64("seed");
  CascadeTree tree;
  if (p.str("flavor") == "pwit") {
    tree = build_pwit(du, dv, horizon, seed);
  } else if (p.str("flavor") == "discrete") {
    const auto n = p.i64("n");
    const double p_n = p.is_auto("p-n") ? 1.0 / static_cast<double>(n) : p.real("p-n");
    tree = build_discrete_tree(n, p_n, du, dv, horizon, seed);
  } else {
    throw ParameterError("--flavor must be pwit or discrete");
  }
  const auto wgg = collapse(tree);
  const double w_tilde = heaviest_root_path(wgg);
  const nlohmann::json doc{{"tree", to_json(tree)}, {"wgg", to_json(wgg)}, {"w_tilde", w_tilde}};
  ctx.outputs.write("cascade.json", doc.dump(2) + "\n");
  ctx.out << tree.nodes.size() << " tree nodes, " << wgg.size() << " wgg vertices, w_tilde = " << fmt(w_tilde) << "\n";
}

void cmd_converge(Context& ctx) {
  const auto& p = ctx.params;
  const auto rows = convergence_test(p.i64_list("n-list"), p.dist("u"), p.dist("v"), p.real("horizon"), p.i64("reps"),
                                     p.u64("seed"), ctx.threads);
  std::ostringstream csv;
  csv << "n,functional,ks_stat,reps,critical_5pct\n";
  for (const auto& r : rows) {
    csv << r.n << ',' << r.functional << ',' << fmt(r.ks_stat) << ',' << r.reps << ',' << fmt(r.critical_5pct) << '\n';
    ctx.out << "n=" << r.n << ' ' << r.functional << " ks=" << fmt(r.ks_stat) << " (5% critical "
            << fmt(r.critical_5pct) << ")\n";
  }
  ctx.outputs.write("converge.csv", csv.str());
}

FixedPointGrid solve_from(const Params& p) {
  return solve_ftw(p.dist("u"), p.real("t-max"), p.real("w-max"), p.real("dt"), p.real("dw"));
}

void cmd_solve_ftw(Context& ctx) {
  const auto grid = solve_from(ctx.params);
  std::ostringstream csv;
  write_grid_csv(grid, csv);
  ctx.outputs.write("ftw.csv", csv.str());
  std::ostringstream bin;
  write_grid_binary(grid, bin);
  ctx.outputs.write("ftw.bin", bin.str());
  double worst = 0.0;
  for (double b : grid.bound) worst = std::max(worst, b);
  ctx.out << "solved " << grid.steps_t + 1 << " x " << grid.steps_w + 1 << " grid, max discretization bound "
          << fmt(worst) << "\n";
}

std::vector<Checkpoint> parse_checkpoints(const std::string& text) {
  std::vector<Checkpoint> cps;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParameterError("checkpoints are t:w pairs, got '" + item + "'");
    Params one({{"t", item.substr(0, colon)}, {"w", item.substr(colon + 1)}});
    cps.push_back({one.real("t"), one.real("w")});
  }
  if (cps.empty()) throw ParameterError("--checkpoints needs at least one t:w pair");
  return cps;
}

void cmd_validate_ftw(Context& ctx) {
  const auto& p = ctx.params;
  const auto grid = solve_from(p);
  const auto report = mc_validate_ftw(grid, parse_checkpoints(p.str("checkpoints")), p.i64("reps"), p.u64("seed"),
                                      ctx.threads);
  std::ostringstream csv;
  csv << "t,w,F_grid,F_mc,mc_stderr,solver_bound,deviation,tolerance,pass\n";
  for (const auto& x : report.points) {
    csv << fmt(x.t) << ',' << fmt(x.w) << ',' << fmt(x.F_grid) << ',' << fmt(x.F_mc) << ',' << fmt(x.mc_std_error)
        << ',' << fmt(x.solver_bound) << ',' << fmt(x.deviation) << ',' << fmt(x.tolerance) << ','
        << (x.pass ? "true" : "false") << '\n';
  }
  ctx.outputs.write("validate.csv", csv.str());
  ctx.out << "max |F_mc - F_grid| = " << fmt(report.max_abs_dev) << (report.all_pass ? ", all within tolerance\n"
                                                                                      : ", some points outside tolerance\n");
}

struct Command {
  std::string name;
  std::string description;
  std::vector<ParamDef> params;
  std::function<void(Context&)> body;
};

const std::vector<ParamDef>& model_defs() {
  static const std::vector<ParamDef> defs{{"n", "1000", "window size"},
                                          {"p", "0.5", "edge probability"},
                                          {"u", "constant(1)", "edge weight law"},
                                          {"v", "constant(0)", "vertex weight law"}};
  return defs;
}

std::vector<ParamDef> with(std::vector<ParamDef> base, std::initializer_list<ParamDef> extra) {
  for (const auto& d : extra) {
    auto it = std::find_if(base.begin(), base.end(), [&](const ParamDef& b) { return b.name == d.name; });
    if (it != base.end()) *it = d;
    else base.push_back(d);
  }
  return base;
}

const std::vector<Command>& commands() {
  static const std::vector<ParamDef> regen{{"c", "auto", "renewal level (auto: pilot suggestion)"},
                                           {"margin", "auto", "boundary exclusion (auto: n/8)"}};
  static const std::vector<ParamDef> ftw{{"u", "constant(1)", "edge weight law, supported on (0, inf)"},
                                         {"t-max", "5", "time horizon"},
                                         {"w-max", "5", "largest weight level"},
                                         {"dt", "0.01", "time step"},
                                         {"dw", "0.01", "weight step"}};
  auto model_regen = model_defs();
  model_regen.insert(model_regen.end(), regen.begin(), regen.end());
  static const std::vector<Command> table{
      {"generate", "Generate one window and write it as JSON",
       with(model_defs(), {{"mode", "sparse", "sparse | dense"}}), cmd_generate},
      {"heaviest", "Heaviest path between two vertices of one window",
       with(model_defs(), {{"mode", "sparse", "sparse | dense"},
                           {"i", "0", "start vertex"},
                           {"j", "auto", "end vertex (auto: n)"},
                           {"variant", "full", "full | edge_only"}}),
       cmd_heaviest},
      {"skeleton", "Monte Carlo density of skeleton points",
       {{"n", "2000", "window size"},
        {"p", "0.5", "edge probability"},
        {"margin", "auto", "boundary exclusion (auto: n/4)"},
        {"reps", "200", "windows"}},
       cmd_skeleton},
      {"renewal", "Detect c-renewal points and estimate their density",
       with(model_regen, {{"reps", "0", "windows for the density estimate (0: skip)"},
                          {"verify", "false", "check the splitting identity at every point"}}),
       cmd_renewal},
      {"estimate-c", "Estimate the growth constant C",
       with(model_regen, {{"reps", "100", "windows"}, {"method", "plug-in", "plug-in | regenerative"}}),
       cmd_estimate_c},
      {"estimate-b2", "Estimate the regenerative CLT variance b^2",
       with(model_regen, {{"reps", "100", "windows"}, {"bootstrap", "1000", "bootstrap resamples"}}),
       cmd_estimate_b2},
      {"clt", "Normality diagnostics of W_{0,n} along a grid of n",
       with(model_regen, {{"n-list", "250,1000,4000", "comma-separated window sizes"}, {"reps", "1000", "windows"}}),
       cmd_clt},
      {"cascade", "Build a cascade tree and its collapse",
       {{"flavor", "pwit", "pwit | discrete"},
        {"horizon", "2", "root-distance cutoff"},
        {"n", "100", "lattice scale (discrete)"},
        {"p-n", "auto", "gap parameter (discrete; auto: 1/n)"},
        {"u", "constant(1)", "edge weight law"},
        {"v", "constant(0)", "vertex weight law"}},
       cmd_cascade},
      {"converge", "KS distances between discrete cascades and the continuum limit",
       {{"n-list", "16,64,256,1024", "comma-separated lattice scales"},
        {"horizon", "2", "root-distance cutoff"},
        {"reps", "2000", "samples per side"},
        {"u", "constant(1)", "edge weight law"},
        {"v", "constant(0)", "vertex weight law"}},
       cmd_converge},
      {"solve-ftw", "Solve the tail equation of the cascade heaviest weight", ftw, cmd_solve_ftw},
      {"validate-ftw", "Compare the solved tail with Monte Carlo",
       with(ftw, {{"t-max", "2", "time horizon"},
                  {"w-max", "3", "largest weight level"},
                  {"checkpoints", "1:0.5,1:1.5,2:0.5,2:1.5", "comma-separated t:w grid nodes"},
                  {"reps", "100000", "cascade samples per t"}}),
       cmd_validate_ftw},
  };
  return table;
}

const std::vector<ParamDef>& common_defs() {
  static const std::vector<ParamDef> defs{{"seed", "0", "root seed"},
                                          {"threads", "auto", "worker threads (auto: SOG_LAB_THREADS or 1)"},
                                          {"out", "soglab-out", "output directory"}};
  return defs;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> all_keys() {
  std::vector<std::string> keys;
  for (const auto& d : common_defs()) keys.push_back(d.name);
  for (const auto& c : commands()) {
    for (const auto& d : c.params) keys.push_back(d.name);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

int execute(const Command& cmd, const ParamMap& resolved, std::ostream& out, RunManifest* manifest_out = nullptr) {
  const Params params(resolved);
  const unsigned threads =
      params.is_auto("threads") ? default_threads() : static_cast<unsigned>(std::max<std::int64_t>(1, params.i64("threads")));
  Outputs outputs(params.str("out"));
  RunManifest manifest;
  manifest.command = cmd.name;
  manifest.params = resolved;
  manifest.seed = params.u64("seed");
  manifest.started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{params, outputs, out, threads};
  cmd.body(ctx);
  manifest.finished = utc_now();
  manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest.output_files = outputs.files();
  fs::create_directories(outputs.dir());
  std::ofstream(outputs.dir() / "manifest.json") << to_json(manifest).dump(2) << "\n";
  if (manifest_out) *manifest_out = manifest;
  return kExitOk;
}

const Command& find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw ParameterError("unknown command '" + name + "'");
}

int replay(const std::string& path, const std::string& out_dir, const std::string& threads, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read manifest " + path);
  const auto original = manifest_from_json(nlohmann::json::parse(in));
  if (original.artifact_version != kVersion) {
    out << "note: manifest was written by version " << original.artifact_version << ", replaying with " << kVersion
        << "\n";
  }
  ParamMap params = original.params;
  params["out"] = out_dir.empty() ? (fs::path(path).parent_path() / "replay").string() : out_dir;
  if (!threads.empty()) params["threads"] = threads;
  RunManifest fresh;
  execute(find_command(original.command), params, out, &fresh);
  std::size_t matched = 0;
  for (const auto& f : original.output_files) {
    auto it = std::find_if(fresh.output_files.begin(), fresh.output_files.end(),
                           [&](const OutputFile& g) { return g.path == f.path; });
    const bool same = it != fresh.output_files.end() && it->sha256 == f.sha256;
    matched += same ? 1 : 0;
    out << (same ? "match    " : "MISMATCH ") << f.path << "\n";
  }
  const bool ok = matched == original.output_files.size() && fresh.output_files.size() == original.output_files.size();
  out << "replay: " << matched << "/" << original.output_files.size() << " outputs reproduced\n";
  return ok ? kExitOk : kExitMismatch;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s.push_back(hex[digest[i] >> 4]);
    s.push_back(hex[digest[i] & 15]);
  }
  return s;
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : m.output_files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"schema_version", kManifestSchemaVersion},
          {"command", m.command},
          {"params", m.params},
          {"seed", m.seed},
          {"artifact_version", m.artifact_version},
          {"started", m.started},
          {"finished", m.finished},
          {"wall_time_s", m.wall_time_s},
          {"output_files", std::move(files)}};
}

RunManifest manifest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kManifestSchemaVersion) {
      throw ParseError("unsupported manifest schema_version " + doc.at("schema_version").dump());
    }
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.params = doc.at("params").get<ParamMap>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.artifact_version = doc.at("artifact_version").get<std::string>();
    m.started = doc.value("started", "");
    m.finished = doc.value("finished", "");
    m.wall_time_s = doc.value("wall_time_s", 0.0);
    for (const auto& f : doc.at("output_files")) {
      m.output_files.push_back(
          {f.at("path").get<std::string>(), f.at("sha256").get<std::string>(), f.at("bytes").get<std::uint64_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

std::vector<std::string> command_names() {
  std::vector<std::string> names;
  for (const auto& c : commands()) names.push_back(c.name);
  return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"soglab: stochastic ordered graphs, regeneration and cascade limits", "soglab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Bound {
    const Command* cmd;
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::string config;
  };
  std::vector<Bound> bound(commands().size());
  for (std::size_t c = 0; c < commands().size(); ++c) {
    const auto& cmd = commands()[c];
    auto& b = bound[c];
    b.cmd = &cmd;
    b.sub = app.add_subcommand(cmd.name, cmd.description);
    b.sub->add_option("--config", b.config, "key = value file; flags override it");
    for (const auto* defs : {&cmd.params, &common_defs()}) {
      for (const auto& d : *defs) {
        b.sub->add_option("--" + d.name, b.values[d.name], d.help + " [" + d.fallback + "]");
      }
    }
  }
  std::string manifest_path, replay_out, replay_threads;
  auto* rep = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  rep->add_option("--out", replay_out, "output directory [<manifest dir>/replay]");
  rep->add_option("--threads", replay_threads, "override the recorded thread count");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << failed->help();
    return kExitUsage;
  }

  try {
    if (rep->parsed()) return replay(manifest_path, replay_out, replay_threads, out);
    for (auto& b : bound) {
      if (!b.sub->parsed()) continue;
      if (b.sub->get_subcommands().size() > 0) continue;
      ParamMap resolved;
      std::vector<std::string> known;
      for (const auto* defs : {&b.cmd->params, &common_defs()}) {
        for (const auto& d : *defs) {
          resolved[d.name] = d.fallback;
          known.push_back(d.name);
        }
      }
      if (!b.config.empty()) {
        for (const auto& [k, v] : parse_config(b.config, b.cmd->name, known, all_keys(), command_names())) {
          resolved[k] = v;
        }
      }
      for (const auto& [k, v] : b.values) {
        if (b.sub->count("--" + k) > 0) resolved[k] = v;
      }
      return execute(*b.cmd, resolved, out);
    }
    return kExitUsage;
  } catch (const DegenerateSampleError& e) {
    err << "degenerate sample: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const AssumptionError& e) {
    err << "assumption violated: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sog
