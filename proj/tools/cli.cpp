#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "ebpttn/ebp.hpp"
#include "ebpttn/eigensolver.hpp"
#include "ebpttn/entropy.hpp"
#include "ebpttn/errors.hpp"
#include "ebpttn/lattice.hpp"
#include "ebpttn/networks.hpp"
#include "ebpttn/optimizer.hpp"
#include "ebpttn/serialization.hpp"

namespace ebpttn::cli {

namespace {

// Values as given on the command line; unset fields fall back to the config file.
struct Flags {
  std::optional<std::string> config, lattice, boundary, objective, ties, network, tree_file, out,
      format;
  std::optional<int> n, width, height, sweeps, restarts, threads, table;
  std::optional<double> coupling, tol;
  std::optional<std::uint64_t> seed;
  std::vector<int> chi;
};

struct RunConfig {
  std::string task;
  std::string lattice = "chain";
  std::optional<int> n, width, height;
  std::string boundary = "open";
  double coupling = 1.0;
  std::string objective = "mmx";
  std::string ties = "lexicographic";
  std::string network;
  std::string tree_file;
  std::vector<int> chi = {8};
  int sweeps = 200;
  double tol = 1e-10;
  int restarts = 10;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  int table = 0;
  std::string out;
  std::string format;
};

void add_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its fields");
  app->add_option("--lattice", f.lattice, "chain | square");
  app->add_option("--n", f.n, "number of sites");
  app->add_option("--width", f.width, "square lattice width");
  app->add_option("--height", f.height, "square lattice height");
  app->add_option("--boundary", f.boundary, "open | periodic");
  app->add_option("--coupling", f.coupling, "exchange coupling J");
  app->add_option("--objective", f.objective, "mmi | mmx");
  app->add_option("--ties", f.ties, "lexicographic | random");
  app->add_option("--network", f.network,
                  "uniform-mps | dimer-mps | pbttn | snake-mps | extended-mmx-64 | mmx | mmi | "
                  "from-file");
  app->add_option("--tree-file", f.tree_file, "tree or topology JSON for --network from-file");
  app->add_option("--chi", f.chi, "bond dimension(s), comma separated")->delimiter(',');
  app->add_option("--sweeps", f.sweeps, "maximum sweeps per restart");
  app->add_option("--tol", f.tol, "per-sweep energy change for convergence");
  app->add_option("--restarts", f.restarts, "random restarts");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--threads", f.threads, "worker threads (0: all cores)");
  app->add_option("--table", f.table, "table number for the tables task (1, 2 or 3)");
  app->add_option("--out", f.out, "output path (default: stdout)");
  app->add_option("--format", f.format, "json | dot | csv");
}

template <typename T>
void merge(T& target, const std::optional<T>& flag, const Json& j, const char* key) {
  if (flag) {
    target = *flag;
  } else if (j.contains(key)) {
    try {
      target = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
  }
}

template <typename T>
void merge(std::optional<T>& target, const std::optional<T>& flag, const Json& j, const char* key) {
  T value{};
  if (flag || j.contains(key)) {
    merge(value, flag, j, key);
    target = value;
  }
}

RunConfig resolve(const std::string& task, const Flags& f) {
  Json file = Json::object();
  if (f.config) file = read_json_file(*f.config);
  if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
  const Json model = file.contains("model") ? file.at("model") : Json::object();

  RunConfig c;
  c.task = task;
  if (c.task.empty()) merge(c.task, std::optional<std::string>{}, file, "task");
  if (c.task.empty()) throw ConfigError("no task given (ed, entropy, ebp, optimize, tables, count)");
  merge(c.lattice, f.lattice, model, "lattice");
  merge(c.n, f.n, model, "n");
  merge(c.width, f.width, model, "width");
  merge(c.height, f.height, model, "height");
  merge(c.boundary, f.boundary, model, "boundary");
  merge(c.coupling, f.coupling, model, "J");
  merge(c.objective, f.objective, file, "objective");
  merge(c.ties, f.ties, file, "ties");
  merge(c.network, f.network, file, "network");
  merge(c.tree_file, f.tree_file, file, "tree_file");
  if (!f.chi.empty()) {
    c.chi = f.chi;
  } else if (file.contains("chi")) {
    const Json& chi = file.at("chi");
    c.chi = chi.is_array() ? chi.get<std::vector<int>>() : std::vector<int>{chi.get<int>()};
  }
  merge(c.sweeps, f.sweeps, file, "sweeps");
  merge(c.tol, f.tol, file, "tol");
  merge(c.restarts, f.restarts, file, "restarts");
  merge(c.seed, f.seed, file, "seed");
  merge(c.table, f.table, file, "table");
  merge(c.out, f.out, file, "out");
  merge(c.format, f.format, file, "format");
  if (f.threads || file.contains("threads")) {
    merge(c.threads, f.threads, file, "threads");
  } else if (const char* env = std::getenv("EBPTTN_THREADS")) {
    try {
      c.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("EBPTTN_THREADS must be an integer");
    }
  }

  if (c.chi.empty()) throw ConfigError("chi list is empty");
  for (std::size_t k = 0; k < c.chi.size(); ++k) {
    if (c.chi[k] < 2) throw ConfigError("chi must be at least 2");
    if (k > 0 && c.chi[k] <= c.chi[k - 1]) throw ConfigError("chi list must be strictly increasing");
  }
  if (c.sweeps < 1) throw ConfigError("sweeps must be positive");
  if (c.restarts < 1) throw ConfigError("restarts must be positive");
  if (!(c.tol >= 0.0)) throw ConfigError("tol must be non-negative");
  return c;
}

LatticeSpec model_of(const RunConfig& c) {
  const Geometry g = parse_geometry(c.lattice);
  LatticeSpec spec;
  if (g == Geometry::chain) {
    if (!c.n) throw ConfigError("chain lattice needs --n");
    spec = LatticeSpec::chain(*c.n, parse_boundary(c.boundary), c.coupling);
  } else {
    int w = c.width.value_or(0);
    int h = c.height.value_or(0);
    if (w == 0 && h == 0 && c.n) {
      const int side = static_cast<int>(std::lround(std::sqrt(*c.n)));
      if (side * side != *c.n) throw ConfigError("square lattice needs --width and --height");
      w = h = side;
    }
    if (c.n && w * h != *c.n) throw ConfigError("--n does not equal width x height");
    spec = LatticeSpec::square(w, h, c.coupling);
    spec.boundary = parse_boundary(c.boundary);
  }
  spec.validate();
  return spec;
}

std::string sig12(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

// Writes to --out when given, otherwise to the command's stdout.
void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.out.empty())
    out << text;
  else
    write_text_file(c.out, text);
}

std::uint64_t lanczos_seed(const RunConfig& c) { return c.seed.value_or(kDefaultLanczosSeed); }

std::string structural_class(const TtnTopology& t) {
  const int n = t.n_sites();
  if (n % 2 == 0 && labeled_isomorphic(t, dimer_mps(n))) return "dimer-mps";
  if (labeled_isomorphic(t, uniform_mps(n))) return "uniform-mps";
  if (is_caterpillar(t)) return "caterpillar";
  if ((n & (n - 1)) == 0 && shape_isomorphic(t, pbttn_1d(n))) return "perfect-binary";
  return "other";
}

BipartitionTree ebp_tree(const LatticeSpec& spec, Objective objective, TieRule ties,
                         std::uint64_t seed, int threads) {
  const BondList bonds = build_bonds(spec);
  const GroundStateResult gs = ground_state(bonds, spec.n_sites);
  const EntropyTable table = entropy_table(gs.wavefunction, threads);
  return run_ebp(table, objective, ties, seed);
}

TtnTopology network_of(const RunConfig& c, const LatticeSpec& spec) {
  const std::string& name = c.network;
  const bool square = spec.geometry == Geometry::square;
  const int n = spec.n_sites;
  if (name == "uniform-mps") return uniform_mps(n);
  if (name == "dimer-mps") return dimer_mps(n);
  if (name == "pbttn") return square ? pbttn_2d(spec.width, spec.height) : pbttn_1d(n);
  if (name == "snake-mps") {
    if (!square) {
      TtnTopology t = uniform_mps(n);
      t.set_name("snake-mps");
      return t;
    }
    return snake_mps(spec.width, spec.height);
  }
  if (name == "extended-mmx-64") {
    if (!square || spec.width != 8 || spec.height != 8)
      throw ConfigError("extended-mmx-64 needs the 8x8 square lattice");
    return extended_mmx_64();
  }
  if (name == "mmx" || name == "mmi") {
    TtnTopology t = topology_from_tree(ebp_tree(spec, parse_objective(name), TieRule::lexicographic,
                                                c.seed.value_or(0), c.threads));
    t.set_name(name);
    return t;
  }
  if (name == "from-file") {
    if (c.tree_file.empty()) throw ConfigError("--network from-file needs --tree-file");
    TtnTopology t = topology_from_json(read_json_file(c.tree_file));
    if (t.n_sites() != n) throw ConfigError("tree file does not match the lattice size");
    return t;
  }
  if (name.empty()) throw ConfigError("optimize needs --network");
  throw ConfigError("unknown network '" + name + "'");
}

std::optional<double> exact_energy(const LatticeSpec& spec, const BondList& bonds) {
  if (spec.n_sites > 16 || spec.n_sites % 2 != 0) return std::nullopt;
  return ground_state(bonds, spec.n_sites).energy;
}

int cmd_ed(const RunConfig& c, std::ostream& out) {
  const LatticeSpec spec = model_of(c);
  const GroundStateResult gs = ground_state(build_bonds(spec), spec.n_sites, lanczos_seed(c));
  out << "energy " << sig12(gs.energy) << "\n"
      << "residual " << std::setprecision(3) << gs.residual << "\n"
      << "gap_estimate " << sig12(gs.gap_estimate) << "\n";
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.out + "'");
    write_wavefunction(f, gs.wavefunction);
  }
  return 0;
}

int cmd_entropy(const RunConfig& c, std::ostream& out) {
  const LatticeSpec spec = model_of(c);
  if (!c.format.empty() && c.format != "csv") throw ConfigError("entropy output is csv only");
  const GroundStateResult gs = ground_state(build_bonds(spec), spec.n_sites, lanczos_seed(c));
  std::ostringstream os;
  write_entropy_csv(os, entropy_table(gs.wavefunction, c.threads));
  emit(c, out, os.str());
  return 0;
}

int cmd_ebp(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const LatticeSpec spec = model_of(c);
  const TieRule ties = c.ties == "random"          ? TieRule::random
                       : c.ties == "lexicographic" ? TieRule::lexicographic
                                                   : throw ConfigError("unknown tie rule '" + c.ties + "'");
  const BipartitionTree tree =
      ebp_tree(spec, parse_objective(c.objective), ties, c.seed.value_or(0), c.threads);
  const std::string fmt = c.format.empty() ? "json" : c.format;
  if (fmt == "json")
    emit(c, out, dump_json(tree_to_json(tree)));
  else if (fmt == "dot")
    emit(c, out, tree_to_dot(tree));
  else
    throw ConfigError("ebp output is json or dot");
  const TtnTopology t = topology_from_tree(tree);
  std::ostream& summary = c.out.empty() ? err : out;
  summary << "objective=" << to_string(tree.objective) << " S_max=" << std::setprecision(10)
          << max_cut_entropy(tree) << " class=" << structural_class(t)
          << " caterpillar=" << (is_caterpillar(t) ? "yes" : "no") << "\n";
  return 0;
}

OptimizeOptions options_of(const RunConfig& c, int chi, std::optional<double> exact) {
  OptimizeOptions o;
  o.chi = chi;
  o.max_sweeps = c.sweeps;
  o.tol = c.tol;
  o.restarts = c.restarts;
  o.seed = c.seed.value_or(1);
  o.threads = c.threads;
  o.exact_energy = exact;
  return o;
}

int cmd_optimize(const RunConfig& c, std::ostream& out) {
  const LatticeSpec spec = model_of(c);
  const BondList bonds = build_bonds(spec);
  const TtnTopology topology = network_of(c, spec);
  const std::optional<double> exact = exact_energy(spec, bonds);
  const std::string fmt = c.format.empty() ? "csv" : c.format;
  if (fmt != "csv" && fmt != "json") throw ConfigError("optimize output is csv or json");
  std::ostringstream csv;
  Json reports = Json::array();
  bool header = true;
  for (int chi : c.chi) {
    const OptimizeResult r = optimize(topology, bonds, options_of(c, chi, exact));
    write_report_csv(csv, r.report, header);
    header = false;
    reports.push_back(report_to_json(r.report));
  }
  emit(c, out, fmt == "csv" ? csv.str() : dump_json(Json{{"reports", reports}}));
  return 0;
}

int cmd_tables(const RunConfig& c, std::ostream& out) {
  struct Preset {
    const char* label;
    LatticeSpec spec;
    std::vector<std::string> networks;
  };
  const std::vector<Preset> presets = {
      {"I", LatticeSpec::chain(16, Boundary::open), {"dimer-mps", "uniform-mps", "pbttn"}},
      {"II", LatticeSpec::chain(16, Boundary::periodic), {"dimer-mps", "uniform-mps", "pbttn"}},
      {"III", LatticeSpec::square(4, 4), {"mmx", "mmi", "pbttn", "snake-mps"}},
  };
  if (c.table < 1 || c.table > 3) throw ConfigError("tables needs --table 1, 2 or 3");
  if (!c.format.empty() && c.format != "csv") throw ConfigError("tables output is csv only");
  const Preset& p = presets[c.table - 1];
  const BondList bonds = build_bonds(p.spec);
  const double exact = ground_state(bonds, p.spec.n_sites).energy;
  std::ostringstream os;
  os << "table,network,chi,energy,delta_e,best_restart,sweeps,converged\n";
  os << p.label << ",exact,," << sig12(exact) << ",0,,,\n";
  RunConfig rc = c;
  for (const auto& name : p.networks) {
    rc.network = name;
    const TtnTopology t = network_of(rc, p.spec);
    for (int chi : c.chi) {
      const OptimizeResult r = optimize(t, bonds, options_of(c, chi, exact));
      os << p.label << ',' << name << ',' << chi << ',' << sig12(r.report.energy) << ','
         << sig12(r.report.delta_e) << ',' << r.report.best_restart << ',' << r.report.sweeps << ','
         << (r.report.converged ? "true" : "false") << '\n';
    }
  }
  emit(c, out, os.str());
  return 0;
}

int cmd_count(const RunConfig& c, std::ostream& out) {
  if (!c.n) throw ConfigError("count needs --n");
  const int n = *c.n;
  if (n < 1) throw ConfigError("count needs n >= 1");
  const std::string rooted = count_rooted(n).str();
  const std::string unrooted = n >= 2 ? count_unrooted(n).str() : "";
  const std::string fmt = c.format.empty() ? "csv" : c.format;
  if (fmt == "csv") {
    emit(c, out, "n,rooted,unrooted\n" + std::to_string(n) + "," + rooted + "," + unrooted + "\n");
  } else if (fmt == "json") {
    Json j;
    j["n"] = n;
    j["rooted"] = rooted;
    j["unrooted"] = n >= 2 ? Json(unrooted) : Json(nullptr);
    emit(c, out, dump_json(j));
  } else {
    throw ConfigError("count output is csv or json");
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement bipartitioning and tree tensor network optimization"};
  app.name("ebpttn");
  Flags flags;
  add_options(&app, flags);
  const std::vector<std::pair<const char*, const char*>> tasks = {
      {"ed", "exact ground-state energy (and optional wavefunction dump via --out)"},
      {"entropy", "entanglement entropy of every bipartition, CSV"},
      {"ebp", "entanglement bipartitioning tree, JSON or DOT"},
      {"optimize", "variational TTN optimization, CSV or JSON report"},
      {"tables", "energy tables for the 16-site benchmarks"},
      {"count", "number of rooted and unrooted binary trees"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : tasks) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_options(sub, flags);
    subs.push_back(sub);
  }
  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string task;
  for (CLI::App* sub : subs)
    if (sub->parsed()) task = sub->get_name();
  try {
    const RunConfig c = resolve(task, flags);
    if (c.task == "ed") return cmd_ed(c, out);
    if (c.task == "entropy") return cmd_entropy(c, out);
    if (c.task == "ebp") return cmd_ebp(c, out, err);
    if (c.task == "optimize") return cmd_optimize(c, out);
    if (c.task == "tables") return cmd_tables(c, out);
    if (c.task == "count") return cmd_count(c, out);
    throw ConfigError("unknown task '" + c.task + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return 3;
  }
}

}  // namespace ebpttn::cli
