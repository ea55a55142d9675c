#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fuplab/cantor.hpp"
#include "fuplab/dolgopyat.hpp"
#include "fuplab/fio.hpp"
#include "fuplab/io.hpp"
#include "fuplab/parallel.hpp"
#include "fuplab/regularity.hpp"
#include "fuplab/schottky.hpp"
#include "fuplab/tiles.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fuplab;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
  fs::path out_dir = ".";
  std::vector<std::string> artifacts;

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir);
    write_file((out_dir / name).string(), content);
    artifacts.push_back(name);
  }
};

std::vector<std::vector<int>> parse_alphabet(const json& j, int d) {
  // "0,2" for d=1; nested arrays for d>=2
  std::vector<std::vector<int>> out;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back({std::stoi(tok)});
  } else {
    for (const auto& e : j) {
      if (e.is_number())
        out.push_back({e.get<int>()});
      else
        out.push_back(e.get<std::vector<int>>());
    }
  }
  for (auto& digit : out)
    if (static_cast<int>(digit.size()) != d)
      throw std::invalid_argument("alphabet digit dimension mismatch");
  return out;
}

FractalMeasure measure_from_config(const json& p) {
  std::string kind = p.value("measure", "cantor");
  if (kind == "cantor") {
    int M = p.value("M", 3);
    int d = p.value("d", 1);
    int k = p.value("k", 6);
    auto A = parse_alphabet(p.value("A", json("0,2")), d);
    return make_cantor_measure(M, d, A, k);
  }
  if (kind == "carpet") return make_carpet_measure(p.value("level", 3));
  if (kind == "segment-x") return make_segment_pair(p.value("atoms", int64_t(1024))).x;
  if (kind == "segment-y") return make_segment_pair(p.value("atoms", int64_t(1024))).y;
  throw std::invalid_argument("unknown measure kind: " + kind);
}

std::vector<Disk> disks_from_json(const json& arr) {
  std::vector<Disk> disks;
  for (const auto& e : arr)
    disks.push_back({cdouble(e.at("center")[0].get<double>(),
                             e.at("center")[1].get<double>()),
                     e.at("radius").get<double>()});
  return disks;
}

std::vector<Disk> figure_disks() {
  return {{cdouble(0.0, 5.2), 1.0},
          {cdouble(-3.0, 0.0), 1.0},
          {cdouble(3.0, 0.0), 1.0},
          {cdouble(0.0, 1.732), 1.0}};
}

void check_keys(const json& p, std::initializer_list<const char*> allowed) {
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }
}

void run_cantor(const json& p, RunContext& ctx) {
  check_keys(p, {"measure", "M", "d", "k", "A", "B", "kmax"});
  CantorSpec spec;
  spec.M = p.value("M", 3);
  spec.d = p.value("d", 1);
  spec.A = parse_alphabet(p.value("A", json("0,2")), spec.d);
  spec.B = parse_alphabet(p.value("B", p.value("A", json("0,2"))), spec.d);
  spec.k = 1;
  int kmax = p.value("kmax", 4);
  auto rows = exponent_sweep(spec, kmax);
  ctx.write("cantor_sweep.csv", sweep_to_csv(rows));
  auto [nonorth, wit] = minor_test(spec);
  json j;
  j["minor_test"] = nonorth;
  if (wit) j["witness_inner"] = wit->inner;
  ctx.write("minor_test.json", j.dump(2));
}

void run_discretize(const json& p, RunContext& ctx) {
  check_keys(p, {"measure", "M", "d", "k", "A", "level", "atoms", "L", "depth",
                 "standard"});
  auto mu = measure_from_config(p);
  int64_t L = p.value("L", int64_t(1000));
  int depth = p.value("depth", 1);
  TileTree tree = p.value("standard", false) ? standard_discretization(mu, L, depth)
                                             : perturbed_discretization(mu, L, depth);
  ctx.write("tree.json", tree_to_json(tree));
  ctx.write("check.json", check_tree(tree).to_json());
}

void run_estimate(const json& p, RunContext& ctx) {
  check_keys(p, {"what", "measure", "M", "d", "k", "A", "level", "atoms", "alpha",
                 "beta", "delta"});
  auto mu = measure_from_config(p);
  std::string what = p.value("what", "regularity");
  ScaleRange range{p.value("alpha", mu.scale_floor), p.value("beta", 1.0)};
  ConstantReport rep;
  if (what == "regularity") {
    double delta = p.value("delta", std::log(2.0) / std::log(3.0));
    rep = estimate_regularity(mu, range, delta);
  } else if (what == "doubling") {
    rep = estimate_doubling(mu, range);
  } else if (what == "nonorthogonality") {
    auto phase = standard_phase(mu.dim);
    rep = estimate_nonorthogonality(mu, mu, phase, range, range);
  } else {
    throw std::invalid_argument("unknown estimator: " + what);
  }
  ctx.write("estimate.json", rep.to_json());
  ctx.write("per_scale.csv", rep.per_scale_csv());
}

void run_constants(const json& p, RunContext& ctx) {
  check_keys(p, {"c_N", "C_D_X", "C_D_Y", "d", "hessian_c1", "hessian_c0"});
  auto k = compute_constants(p.value("c_N", 1.0), p.value("C_D_X", 2.0),
                             p.value("C_D_Y", 2.0), p.value("d", 1),
                             p.value("hessian_c1", 1.0), p.value("hessian_c0", -1.0));
  ctx.write("constants.json", k.to_json());
}

void run_fio_sweep(const json& p, RunContext& ctx) {
  check_keys(p, {"measure", "M", "d", "k", "A", "level", "atoms", "h_values",
                 "grid_step_factor", "delta", "delta_prime", "plot"});
  auto mu = measure_from_config(p);
  std::vector<double> hs = p.value("h_values", std::vector<double>{
                                                   1.0 / 81, 1.0 / 243, 1.0 / 729});
  double factor = p.value("grid_step_factor", 4.0);
  double delta = p.value("delta", std::log(2.0) / std::log(3.0));
  double delta_p = p.value("delta_prime", delta);
  double baseline = std::max(0.0, 0.5 * (mu.dim - delta - delta_p));
  auto res = norm_sweep(
      [&](double h) { return fup_grid_norm(mu, mu, h, h / factor).norm; }, hs,
      baseline);
  ctx.write("sweep.csv", res.csv());
  ctx.write("sweep.json", res.to_json());
  if (p.value("plot", false)) {
    PlotSeries pts;
    for (const auto& row : res.table) {
      pts.x.push_back(row.h);
      pts.y.push_back(row.norm);
    }
    ctx.write("sweep.svg",
              svg_loglog_plot(pts, res.fitted_slope, res.intercept, "grid FUP norms"));
  }
}

void run_contraction(const json& p, RunContext& ctx) {
  check_keys(p, {"measure", "M", "d", "k", "A", "level", "atoms", "L", "depth", "h",
                 "c_N", "C_D"});
  auto mu = measure_from_config(p);
  int64_t L = p.value("L", int64_t(1000));
  int depth = p.value("depth", 1);
  double h = p.value("h", std::pow(3.0, -8));
  auto tree = perturbed_discretization(mu, L, depth);
  auto phase = standard_phase(mu.dim);
  auto constants = compute_constants(p.value("c_N", 0.1), p.value("C_D", 4.0),
                                     p.value("C_D", 4.0), mu.dim, 1.0);
  std::vector<cdouble> f(mu.count(), cdouble(1.0));
  auto res = iterate_contraction(tree, tree, phase, h, f, constants);
  ctx.write("gaps.csv", res.csv());
  json j;
  j["bound"] = res.bound;
  j["K"] = res.K;
  ctx.write("contraction.json", j.dump(2));
}

void run_schottky(const json& p, RunContext& ctx) {
  check_keys(p, {"disks", "depth", "render", "eps_grid", "dir_count", "sample_depth"});
  std::vector<Disk> disks;
  if (p.contains("disks") && p["disks"].is_string())
    disks = disks_from_json(json::parse(read_file(p["disks"].get<std::string>())));
  else if (p.contains("disks"))
    disks = disks_from_json(p["disks"]);
  else
    disks = figure_disks();
  auto group = make_schottky(disks);
  int depth = p.value("depth", 6);
  auto words = iterate_disks(group, depth);
  ctx.write("disks.json", disks_to_json(words));

  auto margin = circle_margin(disks);
  json j;
  j["circle_margin"] = margin.margin;
  j["mapping_error"] = group.mapping_error();

  int sample_depth = p.value("sample_depth", 8);
  auto mu = sample_limit_set(group, sample_depth);
  auto eps = p.value("eps_grid", std::vector<double>{0.1, 0.05});
  auto c0 = nonconcentration_constant(mu, eps, p.value("dir_count", 32));
  j["c0"] = c0.value;
  auto conv = nonorthogonality_from_nonconcentration(std::min(1.0, c0.value), 1.0, 0.0);
  j["c_N_lower_bound"] = conv.c_N;
  ctx.write("schottky.json", j.dump(2));

  if (p.value("render", false)) {
    std::vector<SvgDisk> svg;
    for (int n = 1; n <= depth; ++n)
      for (const auto& wd : iterate_disks(group, n))
        svg.push_back({wd.disk.center.real(), wd.disk.center.imag(), wd.disk.radius,
                       n});
    ctx.write("disks.svg", svg_disks(svg, "schottky disk iteration"));
  }
}

int dispatch(const json& config, const fs::path& out_dir) {
  json cfg = config.contains("config") ? config["config"] : config;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string k = it.key();
    if (k != "command" && k != "parameters" && k != "seed" && k != "threads" &&
        k != "budget" && k != "output_dir")
      throw std::invalid_argument("unknown config key: " + k);
  }
  std::string command = cfg.at("command").get<std::string>();
  json params = cfg.value("parameters", json::object());
  if (cfg.contains("threads") && cfg["threads"].get<int>() > 0)
    set_max_threads(cfg["threads"].get<int>());
  if (cfg.contains("budget") && cfg["budget"].get<int64_t>() > 0)
    set_matrix_budget(cfg["budget"].get<int64_t>());

  RunContext ctx;
  ctx.out_dir = out_dir;
  auto t0 = std::chrono::steady_clock::now();

  if (command == "cantor")
    run_cantor(params, ctx);
  else if (command == "discretize")
    run_discretize(params, ctx);
  else if (command == "estimate")
    run_estimate(params, ctx);
  else if (command == "constants")
    run_constants(params, ctx);
  else if (command == "fio-sweep")
    run_fio_sweep(params, ctx);
  else if (command == "contraction")
    run_contraction(params, ctx);
  else if (command == "schottky")
    run_schottky(params, ctx);
  else
    throw std::invalid_argument("unknown command: " + command);

  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
  json manifest;
  manifest["config"] = {{"command", command},
                        {"parameters", params},
                        {"seed", cfg.value("seed", 0)},
                        {"threads", cfg.value("threads", 0)},
                        {"budget", matrix_budget()}};
  manifest["version"] = kVersion;
  manifest["wall_time_s"] = wall;
  manifest["artifacts"] = ctx.artifacts;
  ctx.write("manifest.json", manifest.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fup-lab: numerical experiments around fractal uncertainty"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  int threads = 0;
  int64_t budget = 0;
  app.add_option("--output-dir", out_dir, "artifact directory")->capture_default_str();
  app.add_option("--threads", threads, "worker cap (0 = machine default)");
  app.add_option("--budget", budget, "matrix entry budget override");

  json cli_params = json::object();
  std::string command;

  // cantor
  {
    auto* sub = app.add_subcommand("cantor", "DFT submatrix sweep");
    static int M = 3, d = 1, kmax = 4;
    static std::string A = "0,2", B;
    sub->add_option("--M", M);
    sub->add_option("--d", d);
    sub->add_option("--A", A);
    sub->add_option("--B", B);
    sub->add_option("--kmax", kmax);
    sub->callback([&]() {
      command = "cantor";
      cli_params = {{"M", M}, {"d", d}, {"A", A}, {"kmax", kmax}};
      cli_params["B"] = B.empty() ? A : B;
    });
  }
  // discretize
  {
    auto* sub = app.add_subcommand("discretize", "perturbed discretization + checks");
    static int M = 3, d = 1, k = 6, depth = 1;
    static int64_t L = 1000;
    static std::string A = "0,2";
    static bool standard = false;
    sub->add_option("--M", M);
    sub->add_option("--d", d);
    sub->add_option("--k", k);
    sub->add_option("--A", A);
    sub->add_option("--L", L);
    sub->add_option("--depth", depth);
    sub->add_flag("--standard", standard);
    sub->callback([&]() {
      command = "discretize";
      cli_params = {{"M", M}, {"d", d},         {"k", k},
                    {"A", A}, {"L", L},         {"depth", depth},
                    {"standard", standard}};
    });
  }
  // estimate
  {
    auto* sub = app.add_subcommand("estimate", "regularity/doubling/nonorthogonality");
    static std::string what = "regularity", measure = "cantor", A = "0,2";
    static int M = 3, d = 1, k = 6;
    static double alpha = 0.0, beta = 1.0, delta = std::log(2.0) / std::log(3.0);
    sub->add_option("--what", what);
    sub->add_option("--measure", measure);
    sub->add_option("--M", M);
    sub->add_option("--d", d);
    sub->add_option("--k", k);
    sub->add_option("--A", A);
    sub->add_option("--alpha", alpha);
    sub->add_option("--beta", beta);
    sub->add_option("--delta", delta);
    sub->callback([&]() {
      command = "estimate";
      cli_params = {{"what", what}, {"measure", measure}, {"M", M}, {"d", d},
                    {"k", k},       {"A", A},             {"beta", beta},
                    {"delta", delta}};
      if (alpha > 0.0) cli_params["alpha"] = alpha;
    });
  }
  // constants
  {
    auto* sub = app.add_subcommand("constants", "explicit exponent formulas");
    static double c_N = 1.0, cdx = 2.0, cdy = 2.0, h1 = 1.0;
    static int d = 1;
    sub->add_option("--c-N", c_N);
    sub->add_option("--C-D-X", cdx);
    sub->add_option("--C-D-Y", cdy);
    sub->add_option("--d", d);
    sub->add_option("--hessian-c1", h1);
    sub->callback([&]() {
      command = "constants";
      cli_params = {{"c_N", c_N}, {"C_D_X", cdx}, {"C_D_Y", cdy}, {"d", d},
                    {"hessian_c1", h1}};
    });
  }
  // fio-sweep
  {
    auto* sub = app.add_subcommand("fio-sweep", "grid FUP norms across h");
    static int M = 3, d = 1, k = 9;
    static std::string A = "0,2";
    static std::vector<double> hs;
    static bool plot = false;
    sub->add_option("--M", M);
    sub->add_option("--d", d);
    sub->add_option("--k", k);
    sub->add_option("--A", A);
    sub->add_option("--h-values", hs);
    sub->add_flag("--plot", plot);
    sub->callback([&]() {
      command = "fio-sweep";
      cli_params = {{"M", M}, {"d", d}, {"k", k}, {"A", A}, {"plot", plot}};
      if (!hs.empty()) cli_params["h_values"] = hs;
    });
  }
  // contraction
  {
    auto* sub = app.add_subcommand("contraction", "one-step gaps and the bound");
    static int M = 3, d = 1, k = 13, depth = 1;
    static int64_t L = 1000;
    static std::string A = "0,2";
    static double h = std::pow(3.0, -8), c_N = 0.1, C_D = 4.0;
    sub->add_option("--M", M);
    sub->add_option("--d", d);
    sub->add_option("--k", k);
    sub->add_option("--A", A);
    sub->add_option("--L", L);
    sub->add_option("--depth", depth);
    sub->add_option("--h-value", h);
    sub->add_option("--c-N", c_N);
    sub->add_option("--C-D", C_D);
    sub->callback([&]() {
      command = "contraction";
      cli_params = {{"M", M},         {"d", d}, {"k", k},     {"A", A},   {"L", L},
                    {"depth", depth}, {"h", h}, {"c_N", c_N}, {"C_D", C_D}};
    });
  }
  // schottky
  {
    auto* sub =
        app.add_subcommand("schottky", "disk iteration and limit-set constants");
    static std::string disks;
    static int depth = 6, sample_depth = 8, dirs = 32;
    static bool render = false;
    sub->add_option("--disks", disks);
    sub->add_option("--depth", depth);
    sub->add_option("--sample-depth", sample_depth);
    sub->add_option("--dirs", dirs);
    sub->add_flag("--render", render);
    sub->callback([&]() {
      command = "schottky";
      cli_params = {{"depth", depth},
                    {"sample_depth", sample_depth},
                    {"dir_count", dirs},
                    {"render", render}};
      if (!disks.empty()) cli_params["disks"] = disks;
    });
  }
  // run
  {
    auto* sub = app.add_subcommand("run", "execute a JSON config or manifest");
    static std::string path;
    sub->add_option("config", path, "config/manifest JSON file")->required();
    sub->callback([&]() {
      command = "__run__";
      cli_params = {{"path", path}};
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json config;
    if (command == "__run__") {
      std::string path = cli_params["path"].get<std::string>();
      if (!fs::exists(path)) {
        std::cerr << "error: config file not found: " << path << "\n";
        return 2;
      }
      config = json::parse(read_file(path));
    } else {
      config = {{"command", command}, {"parameters", cli_params}};
      if (threads > 0) config["threads"] = threads;
      if (budget > 0) config["budget"] = budget;
    }
    return dispatch(config, out_dir);
  } catch (const BudgetError& e) {
    std::cerr << "error (budget): " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error (convergence): " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
