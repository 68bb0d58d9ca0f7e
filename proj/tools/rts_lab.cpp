// rts-lab: command-line front end.
// Exit codes: 0 ok, 1 validation error, 2 numeric failure, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "rts/report.hpp"

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

// "builtin:NAME" selects a built-in system or family.
struct Input {
  std::optional<rts::RecursiveTreeSystem> system;
  std::optional<rts::Family> family;
};

Input load(const std::string& path) {
  Input in;
  if (path.rfind("builtin:", 0) == 0) {
    const std::string name = path.substr(8);
    if (name == "fig4" || name == "example45" || name == "delta1")
      in.system = rts::named_system(name);
    else
      in.family = rts::named_family(name);
    return in;
  }
  const std::string text = read_file(path);
  if (rts::is_family_document(text))
    in.family = rts::parse_family(text);
  else
    in.system = rts::parse_system(text);
  return in;
}

rts::RecursiveTreeSystem instantiate_at(const rts::Family& family, const std::string& t) {
  if (const auto* f = std::get_if<rts::SystemFamily>(&family); f && rts::looks_rational(t))
    return f->instantiate(rts::parse_rational(t));
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
  } catch (const std::logic_error&) {
    throw rts::ValidationError("bad parameter value '" + t + "'");
  }
  return rts::family_function(family)(v);
}

rts::RecursiveTreeSystem resolve(const Input& in, const std::string& t) {
  if (in.system) {
    if (!t.empty()) throw rts::ValidationError("--t applies only to family documents");
    return *in.system;
  }
  if (t.empty()) throw rts::ValidationError("family document needs --t");
  return instantiate_at(*in.family, t);
}

void print_json(const rts::Json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive tree systems on Galton-Watson trees"};
  app.require_subcommand(1);

  std::string path, t;
  double tol = 1e-12;
  auto* analyze = app.add_subcommand("analyze", "Fixed points, derivatives, concordance and criticality (JSON)");
  analyze->add_option("path", path, "System or family document, or builtin:NAME")->required();
  analyze->add_option("--t", t, "Family parameter (rational or decimal)");
  analyze->add_option("--tol", tol, "Root bisection width");

  int samples = 1001;
  auto* curve = app.add_subcommand("curve", "CSV of psi(x) - x on an even grid");
  curve->add_option("path", path, "System or family document, or builtin:NAME")->required();
  curve->add_option("--t", t, "Family parameter");
  curve->add_option("--samples", samples, "Grid points")->check(CLI::Range(2, 100000000));

  std::vector<std::string> t_list;
  std::string out_dir = ".";
  auto* sweep = app.add_subcommand("sweep", "One curve CSV per parameter value plus index.csv");
  sweep->add_option("path", path, "Family document or builtin:NAME")->required();
  sweep->add_option("--t-list", t_list, "Parameter values")->required()->delimiter(',');
  sweep->add_option("--samples", samples, "Grid points")->check(CLI::Range(2, 100000000));
  sweep->add_option("--out-dir", out_dir, "Output directory");

  std::vector<int> seq;
  bool as_json = false;
  auto* crit = app.add_subcommand("crit", "Weights of crit(l_1, ..., l_m)");
  crit->add_option("seq", seq, "Strictly increasing support sequence")->required();
  crit->add_flag("--json", as_json, "JSON output");

  auto* decomp = app.add_subcommand("decompose", "Decompose a critical system into crit measures");
  decomp->add_option("path", path, "System document or builtin:NAME")->required();
  decomp->add_option("--t", t, "Family parameter");
  decomp->add_flag("--json", as_json, "JSON output");

  std::string event = "admissible";
  int m = 1, level = 0, depth = 12;
  std::int64_t trials = 100000, budget = rts::kDefaultVertexBudget;
  std::uint64_t seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate against the analytic prediction");
  simulate->add_option("path", path, "System or family document, or builtin:NAME")->required();
  simulate->add_option("--t", t, "Family parameter");
  simulate->add_option("--event", event, "admissible, bounded_tier or min_level")
      ->check(CLI::IsMember({"admissible", "bounded_tier", "min_level"}));
  simulate->add_option("--m", m, "Tier bound for bounded_tier");
  simulate->add_option("--level", level, "Level n for bounded_tier");
  simulate->add_option("--depth", depth, "Cutoff depth");
  simulate->add_option("--trials", trials, "Trials")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--budget", budget, "Vertex budget per trial")->check(CLI::PositiveNumber);

  std::string kind;
  double param = 0.0;
  std::optional<double> at_most;
  auto* growth = app.add_subcommand("growth", "Distributional growth recursions (CSV per level)");
  growth->add_option("kind", kind, "minplus, fig5 or fig1_conditioned")->required();
  growth->add_option("--t", param, "Family parameter");
  growth->add_option("--depth", depth, "Levels");
  growth->add_option("--trials", trials, "Population size")->check(CLI::PositiveNumber);
  growth->add_option("--seed", seed, "Master seed");
  growth->add_option("--at-most", at_most, "With --json, report the final fraction at most this value");
  growth->add_flag("--json", as_json, "JSON output");

  std::vector<double> t_range;
  double delta = 1e-6;
  auto* find = app.add_subcommand("find-critical", "Locate and classify the phase transition of a family");
  find->add_option("path", path, "Family document or builtin:NAME")->required();
  find->add_option("--t-range", t_range, "lo hi")->expected(2);
  find->add_option("--delta", delta, "Ignore fixed points below this value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      rts::FixedPointOptions options;
      options.tol = tol;
      print_json(rts::analysis_json(resolve(load(path), t), options));
    } else if (*curve) {
      std::cout << rts::curve_csv(resolve(load(path), t), samples);
    } else if (*sweep) {
      const Input in = load(path);
      if (!in.family) throw rts::ValidationError("sweep needs a family document");
      std::filesystem::create_directories(out_dir);
      std::string index = "t,file\n";
      for (std::size_t i = 0; i < t_list.size(); ++i) {
        const std::string file = "curve_" + std::to_string(i) + ".csv";
        write_file(std::filesystem::path(out_dir) / file, rts::curve_csv(instantiate_at(*in.family, t_list[i]), samples));
        index += t_list[i] + "," + file + "\n";
      }
      write_file(std::filesystem::path(out_dir) / "index.csv", index);
      std::cout << index;
    } else if (*crit) {
      const auto spec = rts::crit_measure(seq);
      if (as_json)
        print_json(rts::crit_json(spec));
      else
        std::cout << rts::weight_table(spec.weights());
    } else if (*decomp) {
      const auto d = rts::decompose(resolve(load(path), t));
      if (as_json)
        print_json(rts::decomposition_json(d));
      else
        std::cout << rts::decomposition_table(d);
    } else if (*simulate) {
      const auto system = resolve(load(path), t);
      if (event == "admissible")
        print_json(rts::estimate_json(rts::estimate_admissible(system, depth, trials, seed, budget)));
      else if (event == "bounded_tier")
        print_json(rts::estimate_json(rts::estimate_bounded_tier(system, m, level, depth, trials, seed, budget)));
      else
        print_json(rts::min_level_json(rts::min_level_sizes(system, depth, trials, seed, budget)));
    } else if (*growth) {
      const auto run = rts::recursion_growth(kind, param, depth, trials, seed);
      if (as_json) {
        rts::Json levels = rts::Json::array();
        for (const auto& s : run.levels)
          levels.push_back({{"level", s.level}, {"mean", s.mean}, {"stderr", s.std_error}, {"p50", s.p50},
                            {"p90", s.p90}, {"n", s.n}});
        rts::Json j{{"kind", kind}, {"x0", run.x0}, {"levels", levels}};
        if (at_most) j["fraction_at_most"] = {{"threshold", *at_most}, {"fraction", run.fraction_at_most(*at_most)}};
        print_json(j);
      } else {
        std::cout << rts::levels_csv(run.levels);
      }
    } else if (*find) {
      const Input in = load(path);
      if (!in.family) throw rts::ValidationError("find-critical needs a family document");
      const double lo = t_range.empty() ? rts::family_t_min(*in.family) : t_range[0];
      const double hi = t_range.empty() ? rts::family_t_max(*in.family) : t_range[1];
      rts::TangencyOptions options;
      options.delta = delta;
      print_json(rts::transition_json(rts::find_tangency(rts::family_function(*in.family), lo, hi, options)));
    }
  } catch (const rts::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const rts::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
