#include "dopasym/asymptotics.hpp"
#include "dopasym/equilibrium.hpp"
#include "dopasym/errors.hpp"
#include "dopasym/hexagon.hpp"
#include "dopasym/io.hpp"
#include "dopasym/kernels.hpp"
#include "dopasym/orthopoly.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dopasym;
using json = nlohmann::json;

namespace {

struct RunConfig {
  std::string command;
  std::string family = "hahn";
  double p = 0.5, q = 0.5;
  double A = 1.0, B = 1.0, C = 1.0;
  std::optional<double> P, Q;
  int N = 40;
  std::vector<int> Ns;
  int kmax = -1;
  int k = -1;
  double c = 0.5;
  int zeros = -1;
  int bits = default_precision_bits();
  int M = 200;
  std::string solver = "closed";
  int quad = 60;
  std::optional<double> sine_x;
  std::string airy_edge;
  int window = 6;
  int ha = 2, hb = 2, hc = 2, hm = 1;
  int index = 0;
  int samples = 1000;
  double tau = 0.25;
  int points = 50;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

// Binds CLI flags and matching config-file keys to the same fields.
class Binder {
 public:
  Binder(CLI::App* app, std::map<std::string, std::function<void(const json&)>>& keys) : app_(app), keys_(keys) {}

  template <class T>
  Binder& opt(const std::string& name, T& field, const std::string& help) {
    app_->add_option("--" + name, field, help);
    keys_[name] = [&field](const json& v) { field = v.get<T>(); };
    return *this;
  }

  template <class T>
  Binder& opt(const std::string& name, std::optional<T>& field, const std::string& help) {
    app_->add_option_function<T>("--" + name, [&field](const T& v) { field = v; }, help);
    keys_[name] = [&field](const json& v) { field = v.get<T>(); };
    return *this;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>>& keys_;
};

int resolve_k(const RunConfig& rc, int N) {
  if (rc.k >= 0) return rc.k;
  return static_cast<int>(std::floor(rc.c * N + 1e-9));
}

FamilySpec family_spec(const RunConfig& rc, int N) {
  const Family f = family_from_name(rc.family);
  switch (f) {
    case Family::Krawtchouk:
      return FamilySpec::krawtchouk(rc.p, rc.q);
    case Family::Hahn:
    case Family::AssocHahn: {
      if (rc.P || rc.Q) {
        const double P = rc.P.value_or(1.0), Q = rc.Q.value_or(1.0);
        return f == Family::Hahn ? FamilySpec::hahn(P, Q) : FamilySpec::assoc_hahn(P, Q);
      }
      return f == Family::Hahn ? FamilySpec::hahn_scaled(rc.A, rc.B, N) : FamilySpec::assoc_hahn_scaled(rc.A, rc.B, N);
    }
    case Family::Custom:
      break;
  }
  throw ValidationError("BadParams", "family must be krawtchouk, hahn or assoc_hahn");
}

EquilibriumMeasure closed_measure(const RunConfig& rc, double c) {
  const Family f = family_from_name(rc.family);
  if (f == Family::Krawtchouk) return krawtchouk_equilibrium(rc.p, rc.q, c);
  if (rc.P || rc.Q) throw ValidationError("BadParams", "equilibrium measures need the scaled parameters --A, --B");
  if (f == Family::Hahn) return hahn_equilibrium(rc.A, rc.B, c);
  if (f == Family::AssocHahn) return assoc_hahn_equilibrium(rc.A, rc.B, c);
  throw ValidationError("BadParams", "unsupported family");
}

RealFn family_field(const RunConfig& rc) {
  const Family f = family_from_name(rc.family);
  if (f == Family::Krawtchouk) return krawtchouk_field(rc.p, rc.q);
  if (f == Family::Hahn) return hahn_field(rc.A, rc.B);
  if (f == Family::AssocHahn) return assoc_hahn_field(rc.A, rc.B);
  throw ValidationError("BadParams", "unsupported family");
}

json family_echo(const RunConfig& rc) {
  json j{{"family", rc.family}};
  if (rc.family == "krawtchouk") {
    j["p"] = rc.p;
    j["q"] = rc.q;
  } else if (rc.P || rc.Q) {
    j["P"] = rc.P.value_or(1.0);
    j["Q"] = rc.Q.value_or(1.0);
  } else {
    j["A"] = rc.A;
    j["B"] = rc.B;
  }
  return j;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("BadParams", what);
}

void run_poly(const RunConfig& rc, json& echo, std::ostream& os) {
  require(rc.N >= 1, "N must be positive");
  const int kmax = rc.kmax < 0 ? rc.N - 1 : rc.kmax;
  require(kmax <= rc.N - 1, "kmax must not exceed N - 1");
  echo.update(family_echo(rc));
  echo.update({{"N", rc.N}, {"kmax", kmax}, {"bits", rc.bits}});
  if (rc.zeros >= 0) echo["zeros"] = rc.zeros;
  const auto w = make_weights(family_spec(rc, rc.N), uniform_nodes(rc.N), rc.bits);
  const OrthoSystem sys = stieltjes_recurrence(w, kmax, {true, 4096, false});
  write_provenance(os, echo.dump());
  if (rc.zeros >= 0) {
    require(rc.zeros >= 1 && rc.zeros <= kmax, "zeros degree must lie in [1, kmax]");
    PrecisionScope scope(sys.precision_bits);
    os << "j,zero\n";
    const auto z = zeros(sys, rc.zeros);
    for (std::size_t j = 0; j < z.size(); ++j) os << j << ',' << z[j].str(30) << '\n';
    return;
  }
  write_ortho_csv(sys, os);
}

void run_equilibrium(const RunConfig& rc, json& echo, std::ostream& os) {
  echo.update(family_echo(rc));
  echo.update({{"c", rc.c}, {"M", rc.M}, {"solver", rc.solver}, {"format", rc.format}});
  EquilibriumMeasure m;
  if (rc.solver == "closed") {
    m = closed_measure(rc, rc.c);
  } else if (rc.solver == "qp") {
    m = solve_equilibrium_qp(family_field(rc), [](double) { return 1.0; }, rc.c, rc.M).measure;
  } else {
    throw ValidationError("BadParams", "solver must be closed or qp");
  }
  const auto rep = verify_variational(m, family_field(rc), rc.c);
  if (rc.format == "json") {
    json j = m.summary();
    j["variational"] = {{"band_residual", rep.band_residual},
                        {"void_margin", std::isfinite(rep.void_margin) ? json(rep.void_margin) : json()},
                        {"sat_margin", std::isfinite(rep.sat_margin) ? json(rep.sat_margin) : json()}};
    j["provenance"] = std::string(kVersion) + " " + echo.dump();
    os << j.dump(2) << '\n';
    return;
  }
  require(rc.format == "csv", "format must be csv or json");
  write_provenance(os, echo.dump());
  write_measure_csv(m, os, rc.M);
  std::cerr << "configuration " << m.configuration() << " band_residual " << fmt_double(rep.band_residual) << '\n';
}

void run_asymptotics(const RunConfig& rc, json& echo, std::ostream& os) {
  const std::vector<int> Ns = rc.Ns.empty() ? std::vector<int>{rc.N} : rc.Ns;
  echo.update(family_echo(rc));
  echo.update({{"c", rc.c}, {"N", Ns}});
  const EquilibriumMeasure m = closed_measure(rc, rc.c);
  std::vector<SweepRow> rows;
  for (int N : Ns) {
    require(N >= 2, "N must be at least 2");
    const int k = resolve_k(rc, N);
    require(k >= 1 && k < N, "degree must lie in [1, N-1]");
    const auto w = make_weights(family_spec(rc, N), uniform_nodes(N), rc.bits);
    RealFn eta;
    if (w.kind() != Family::Krawtchouk) eta = [e = w.eta_limit()](double) { return e; };
    const OuterModel model(m, eta, k - rc.c * N, N);
    const OrthoSystem sys = stieltjes_recurrence(w, k, {true, 4096, false});
    const auto r = regional_errors(sys, k, model, standard_test_points(model));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_provenance(os, echo.dump());
  write_sweep_csv(rows, os);
}

void run_kernel(const RunConfig& rc, json& echo, std::ostream& os) {
  const int k = resolve_k(rc, rc.N);
  require(k >= 0 && k <= rc.N, "k must lie in [0, N]");
  echo.update(family_echo(rc));
  echo.update({{"N", rc.N}, {"k", k}, {"format", rc.format}});
  const auto w = make_weights(family_spec(rc, rc.N), uniform_nodes(rc.N), rc.bits);
  const OrthoSystem sys = stieltjes_recurrence(w, std::min(k, rc.N - 1), {true, 4096, false});
  const KernelMatrix K = cd_kernel(sys, k);
  if (rc.format == "csv") {
    write_provenance(os, echo.dump());
    write_kernel_csv(K, os);
    return;
  }
  require(rc.format == "json", "format must be csv or json");
  const KernelReport rep = check_kernel(K);
  json j{{"symmetry", rep.symmetry},
         {"projection", rep.projection},
         {"trace_error", rep.trace_error},
         {"diagonal_min", rep.diagonal_min},
         {"diagonal_max", rep.diagonal_max}};
  if (rc.sine_x || !rc.airy_edge.empty()) {
    require(!(rc.P || rc.Q), "universality comparisons need the scaled parameters --A, --B");
    const EquilibriumMeasure m = closed_measure(rc, static_cast<double>(k) / rc.N);
    if (rc.sine_x) {
      echo["sine"] = *rc.sine_x;
      j["sine_deviation"] = sine_compare(K, m, *rc.sine_x, rc.window);
    }
    if (!rc.airy_edge.empty()) {
      require(rc.airy_edge == "left" || rc.airy_edge == "right", "airy edge must be left or right");
      echo["airy"] = rc.airy_edge;
      const auto a = airy_compare(K, m, rc.airy_edge == "left" ? Edge::Left : Edge::Right, rc.window);
      j["airy"] = {{"deviation", a.deviation}, {"pairs", a.pairs}, {"scale", a.scale}};
    }
    echo["window"] = rc.window;
  }
  j["provenance"] = std::string(kVersion) + " " + echo.dump();
  os << j.dump(2) << '\n';
}

void run_tw(const RunConfig& rc, json& echo, std::ostream& os) {
  echo["quad"] = rc.quad;
  write_provenance(os, echo.dump());
  write_tw_table_csv(os, rc.quad);
}

json hex_echo(const RunConfig& rc) { return {{"a", rc.ha}, {"b", rc.hb}, {"c", rc.hc}}; }

void run_hex_count(const RunConfig& rc, json&, std::ostream& os) {
  os << count_tilings(rc.ha, rc.hb, rc.hc) << '\n';
}

void run_hex_enumerate(const RunConfig& rc, json& echo, std::ostream& os) {
  echo.update(hex_echo(rc));
  echo["format"] = rc.format;
  const auto ts = enumerate_tilings(rc.ha, rc.hb, rc.hc);
  if (rc.format == "svg") {
    require(rc.index >= 0 && rc.index < static_cast<int>(ts.size()), "tiling index out of range");
    echo["index"] = rc.index;
    os << "<!-- " << kVersion << ' ' << echo.dump() << " -->\n";
    write_tiling_svg(ts[static_cast<std::size_t>(rc.index)], os);
    return;
  }
  require(rc.format == "csv", "format must be csv or svg");
  write_provenance(os, echo.dump());
  os << "tiling,line,holes\n";
  for (std::size_t t = 0; t < ts.size(); ++t)
    for (int m = 1; m < rc.ha + rc.hb; ++m) {
      os << t << ',' << m << ',';
      const auto h = ts[t].holes(m);
      for (std::size_t i = 0; i < h.size(); ++i) os << (i ? " " : "") << h[i];
      os << '\n';
    }
}

void run_hex_sample(const RunConfig& rc, json& echo, std::ostream& os) {
  const HexagonSpec s = make_hexagon_spec(rc.ha, rc.hb, rc.hc, rc.hm);
  echo.update(hex_echo(rc));
  echo.update({{"m", rc.hm}, {"samples", rc.samples}, {"seed", rc.seed}});
  const auto draws = sample_column_holes(s, rc.samples, rc.seed);
  write_provenance(os, echo.dump());
  os << "replica,holes\n";
  for (std::size_t r = 0; r < draws.size(); ++r) {
    os << r << ',';
    for (std::size_t i = 0; i < draws[r].size(); ++i) os << (i ? " " : "") << draws[r][i];
    os << '\n';
  }
}

void run_hex_arctic(const RunConfig& rc, json& echo, std::ostream& os) {
  require(rc.points >= 1, "points must be positive");
  echo.update({{"A", rc.A}, {"B", rc.B}, {"C", rc.C}, {"points", rc.points}});
  std::vector<double> taus;
  for (int i = 0; i < rc.points; ++i) taus.push_back((rc.A + rc.B) * (i + 0.5) / rc.points);
  const auto pts = arctic_boundary(rc.A, rc.B, rc.C, taus);
  write_provenance(os, echo.dump());
  write_arctic_csv(pts, os);
}

void run_hex_edge_stats(const RunConfig& rc, json& echo, std::ostream& os) {
  const std::vector<int> ns = rc.Ns.empty() ? std::vector<int>{16, 32, 64} : rc.Ns;
  echo.update({{"A", rc.A}, {"B", rc.B}, {"C", rc.C}, {"tau", rc.tau}, {"n", ns}, {"samples", rc.samples},
               {"seed", rc.seed}});
  const auto rows = edge_fluctuation_sweep(rc.A, rc.B, rc.C, rc.tau, ns, rc.samples, rc.seed);
  write_provenance(os, echo.dump());
  write_edge_stats_csv(rows, os);
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  std::string config_path;
  CLI::App app{"Discrete orthogonal polynomial ensembles: recurrences, equilibrium measures, asymptotics"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::map<CLI::App*, std::map<std::string, std::function<void(const json&)>>> keys;
  std::map<CLI::App*, std::function<void(const RunConfig&, json&, std::ostream&)>> actions;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file whose keys override flags");
    Binder(sub, keys[sub]).opt("out", rc.out, "output path (default stdout)").opt("bits", rc.bits, "mantissa bits");
  };
  auto family = [&](CLI::App* sub) {
    Binder(sub, keys[sub])
        .opt("family", rc.family, "krawtchouk, hahn or assoc_hahn")
        .opt("p", rc.p, "Krawtchouk p")
        .opt("q", rc.q, "Krawtchouk q")
        .opt("A", rc.A, "scaled Hahn parameter A")
        .opt("B", rc.B, "scaled Hahn parameter B")
        .opt("P", rc.P, "raw Hahn parameter P")
        .opt("Q", rc.Q, "raw Hahn parameter Q");
  };

  auto* poly = app.add_subcommand("poly", "recurrence coefficients and zeros");
  common(poly);
  family(poly);
  Binder(poly, keys[poly])
      .opt("N", rc.N, "number of nodes")
      .opt("kmax", rc.kmax, "largest degree (default N-1)")
      .opt("zeros", rc.zeros, "print the zeros of this degree instead");
  actions[poly] = run_poly;

  auto* eq = app.add_subcommand("equilibrium", "equilibrium measure and variational report");
  common(eq);
  family(eq);
  Binder(eq, keys[eq])
      .opt("c", rc.c, "filling fraction")
      .opt("M", rc.M, "grid points")
      .opt("solver", rc.solver, "closed or qp")
      .opt("format", rc.format, "csv or json");
  actions[eq] = run_equilibrium;

  auto* asy = app.add_subcommand("asymptotics", "regional error sweep");
  common(asy);
  family(asy);
  Binder(asy, keys[asy]).opt("c", rc.c, "filling fraction").opt("N", rc.Ns, "list of N").opt("k", rc.k, "degree");
  actions[asy] = run_asymptotics;

  auto* ker = app.add_subcommand("kernel", "reproducing kernel, invariants and universality");
  common(ker);
  family(ker);
  Binder(ker, keys[ker])
      .opt("N", rc.N, "number of nodes")
      .opt("k", rc.k, "number of particles")
      .opt("c", rc.c, "filling fraction when k is not given")
      .opt("format", rc.format, "csv (matrix) or json (report)")
      .opt("sine", rc.sine_x, "compare with the sine kernel at this point")
      .opt("airy", rc.airy_edge, "compare with the Airy kernel at the left or right edge")
      .opt("window", rc.window, "comparison window");
  actions[ker] = run_kernel;

  auto* tw = app.add_subcommand("tw", "Tracy-Widom distribution table");
  common(tw);
  Binder(tw, keys[tw]).opt("quad", rc.quad, "quadrature points");
  actions[tw] = run_tw;

  auto* hex = app.add_subcommand("hexagon", "rhombus tilings of the hexagon");
  hex->require_subcommand(1);
  auto sides = [&](CLI::App* sub) {
    Binder(sub, keys[sub]).opt("a", rc.ha, "side a").opt("b", rc.hb, "side b").opt("c", rc.hc, "side c");
  };
  auto* hcount = hex->add_subcommand("count", "MacMahon count");
  common(hcount);
  sides(hcount);
  actions[hcount] = run_hex_count;
  auto* henum = hex->add_subcommand("enumerate", "all tilings as per-line hole lists, or one as SVG");
  common(henum);
  sides(henum);
  Binder(henum, keys[henum]).opt("format", rc.format, "csv or svg").opt("index", rc.index, "tiling for svg");
  actions[henum] = run_hex_enumerate;
  auto* hsample = hex->add_subcommand("sample", "hole positions on one line");
  common(hsample);
  sides(hsample);
  Binder(hsample, keys[hsample])
      .opt("m", rc.hm, "line index")
      .opt("samples", rc.samples, "number of draws")
      .opt("seed", rc.seed, "master seed");
  actions[hsample] = run_hex_sample;
  auto* harctic = hex->add_subcommand("arctic", "band edges along the lines of the rescaled hexagon");
  common(harctic);
  Binder(harctic, keys[harctic])
      .opt("A", rc.A, "side a / n")
      .opt("B", rc.B, "side b / n")
      .opt("C", rc.C, "side c / n")
      .opt("points", rc.points, "number of lines");
  actions[harctic] = run_hex_arctic;
  auto* hedge = hex->add_subcommand("edge-stats", "top-hole fluctuations against Tracy-Widom");
  common(hedge);
  Binder(hedge, keys[hedge])
      .opt("A", rc.A, "side a / n")
      .opt("B", rc.B, "side b / n")
      .opt("C", rc.C, "side c / n")
      .opt("tau", rc.tau, "line position m / n")
      .opt("n", rc.Ns, "list of n")
      .opt("samples", rc.samples, "draws per n")
      .opt("seed", rc.seed, "master seed");
  actions[hedge] = run_hex_edge_stats;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = nullptr;
  std::string name;
  for (CLI::App* sub : app.get_subcommands()) {
    name = sub->get_name();
    active = sub;
    for (CLI::App* inner : sub->get_subcommands()) {
      name += " " + inner->get_name();
      active = inner;
    }
  }
  rc.command = name;

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("BadConfig", "cannot open " + config_path);
      const json cfg = json::parse(in);
      if (!cfg.is_object()) throw ValidationError("BadConfig", "config must be a JSON object");
      auto& table = keys[active];
      for (const auto& [key, value] : cfg.items()) {
        if (key == "command") continue;
        const auto it = table.find(key);
        if (it == table.end()) throw ValidationError("BadConfig", "unknown key " + key + " for " + name);
        it->second(value);
      }
    }
    json echo{{"command", name}};
    std::ostringstream buf;
    actions.at(active)(rc, echo, buf);
    if (rc.out.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream f(rc.out, std::ios::binary);
      if (!f) throw ValidationError("BadOutput", "cannot write " + rc.out);
      f << buf.str();
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: BadConfig: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
