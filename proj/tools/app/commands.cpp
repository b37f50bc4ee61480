#include "commands.hpp"

#include "channel_io.hpp"
#include "report.hpp"

#include "entcost/metrics.hpp"
#include "entcost/monotones.hpp"
#include "entcost/simulate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>

namespace entcost::app {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  double tol_feas = 1e-8;
  double tol_gap = 1e-7;
  std::string out;
  bool omit_timing = false;
  bool verbose = false;

  conic::SolverSettings settings() const {
    conic::SolverSettings s;
    s.feas_tol = tol_feas;
    s.gap_tol = tol_gap;
    s.verbose = verbose;
    return s;
  }
};

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ReportRow bounded_row(const std::string& channel, const std::string& quantity, const BoundedValue& v,
                      const Globals& g, Clock::time_point t0, bool has_relaxation = true) {
  ReportRow r;
  r.channel = channel;
  r.quantity = quantity;
  r.value = format_number(v.value);
  r.direction = to_string(v.direction);
  r.relaxation = has_relaxation ? to_string(v.relaxation) : "-";
  r.epsilon = v.epsilon;
  r.status = conic::to_string(v.status);
  r.gap = v.duality_gap;
  r.wall_ms = elapsed_ms(t0);
  r.seed = g.seed;
  return r;
}

FreeSetRelaxation make_relaxation(const std::string& name, const ChoiChannel& n, int samples, std::uint64_t seed) {
  switch (parse_relaxation(name)) {
    case RelaxationKind::ppt_choi: return FreeSetRelaxation::ppt_choi();
    case RelaxationKind::ppt_state: return FreeSetRelaxation::ppt_state();
    case RelaxationKind::sepp_sampled: return FreeSetRelaxation::sepp_sampled(n.in_dims(), samples, seed);
  }
  throw InputError("unknown relaxation");
}

json plan_json(const SimulationPlan& p) {
  json j = {{"method", to_string(p.method)},
            {"k", p.k},
            {"ebits", p.ebits},
            {"achieved_error", p.achieved_error},
            {"lambda", p.lambda},
            {"certificate", p.certificate}};
  if (p.fsepp.samples > 0)
    j["fsepp"] = {{"verdict", p.fsepp.verdict()},
                  {"samples", p.fsepp.samples},
                  {"seed", p.fsepp.seed},
                  {"tol", p.fsepp.tol},
                  {"worst_min_eigenvalue", p.fsepp.worst_min_eigenvalue}};
  return j;
}

void write_plan(const std::string& path, const std::string& name, const SimulationPlan& p, const json& more = {}) {
  ChannelFile f;
  f.name = name + "-plan";
  f.description = std::string("simulating channel (") + to_string(p.method) + ", K=" + std::to_string(p.k) + ")";
  f.channel = p.m;
  f.extra["plan"] = plan_json(p);
  for (const auto& [k, v] : more.items()) f.extra["plan"][k] = v;
  write_channel(path, f);
}

std::vector<ReportRow> plan_rows(const std::string& channel, const SimulationPlan& p, const Globals& g,
                                 Clock::time_point t0) {
  std::vector<ReportRow> rows;
  auto add = [&](const std::string& q, const std::string& v, const std::string& dir) {
    ReportRow r;
    r.channel = channel;
    r.quantity = q;
    r.value = v;
    r.direction = dir;
    r.status = "certified";
    r.wall_ms = elapsed_ms(t0);
    r.seed = g.seed;
    rows.push_back(r);
  };
  add("method", to_string(p.method), "upper");
  add("K", std::to_string(p.k), "upper");
  add("ebits", format_number(p.ebits), "upper");
  add("achieved_error", format_number(p.achieved_error), "exact");
  return rows;
}

ReportRow fsepp_row(const std::string& channel, const FseppDiagnostics& d, Clock::time_point t0) {
  ReportRow r;
  r.channel = channel;
  r.quantity = "fsepp_worst_min_eig";
  r.value = format_number(d.worst_min_eigenvalue);
  r.direction = "upper";
  r.status = d.verdict();
  r.wall_ms = elapsed_ms(t0);
  r.seed = d.seed;
  return r;
}

bool is_failure(const ReportRow& r) {
  return r.status == "infeasible" || r.status == "unbounded" || r.status == "inaccurate";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified brackets on the one-shot entanglement cost of bipartite channels", "entcost"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--tol-feas", g.tol_feas, "solver feasibility tolerance")->capture_default_str();
  app.add_option("--tol-gap", g.tol_gap, "solver duality-gap tolerance")->capture_default_str();
  app.add_option("--out", g.out, "write the TSV report here instead of stdout");
  app.add_flag("--omit-timing", g.omit_timing, "print '-' for wall time");
  app.add_flag("--verbose", g.verbose, "solver progress on stderr");

  std::vector<ReportRow> rows;
  std::function<void()> action;

  // monotone
  auto* mono = app.add_subcommand("monotone", "evaluate resource monotones of a channel");
  std::string m_channel, m_reference, m_relax = "ppt-choi";
  std::vector<std::string> m_measures;
  double m_eps = 0;
  int m_samples = 64, m_restarts = 32;
  mono->add_option("--channel", m_channel, "channel file")->required();
  mono->add_option("--measure", m_measures, "dmax, gen-rob, std-rob or power (repeatable)")
      ->required()
      ->check(CLI::IsMember({"dmax", "gen-rob", "std-rob", "power"}));
  mono->add_option("--relaxation", m_relax, "ppt-choi, sepp-sampled or ppt-state")->capture_default_str();
  mono->add_option("--epsilon", m_eps, "smoothing radius (half diamond distance)")->capture_default_str();
  mono->add_option("--samples", m_samples, "product inputs for sepp-sampled")->capture_default_str();
  mono->add_option("--reference", m_reference, "second channel file for dmax");
  mono->add_option("--restarts", m_restarts, "multistart count for power")->capture_default_str();
  mono->callback([&] {
    action = [&] {
      const auto f = read_channel(m_channel);
      const auto& n = f.channel;
      for (const auto& m : m_measures) {
        const auto t0 = Clock::now();
        if (m == "dmax") {
          if (m_reference.empty()) throw InputError("dmax needs --reference");
          const auto ref = read_channel(m_reference);
          rows.push_back(bounded_row(f.name, "dmax", dmax_channels(n, ref.channel), g, t0, false));
        } else if (m == "power") {
          const auto p = rob_gen_power(n, m_restarts, g.seed, g.settings());
          rows.push_back(bounded_row(f.name, "power", p.bound, g, t0, false));
        } else {
          const bool standard = m == "std-rob";
          const auto relax = make_relaxation(m_relax, n, m_samples, g.seed);
          BoundedValue v;
          if (n.in_dim() == 1 && relax.kind == RelaxationKind::ppt_state && m_eps == 0) {
            const DensityMatrix rho(n.out_dims(), n.choi());
            v = standard ? std_robustness_state(rho, {}, g.settings()) : gen_robustness_state(rho, {}, g.settings());
            v.value = std::log2(std::max(v.value, 1.0));
            v.log_scale = true;
          } else {
            v = standard ? std_log_robustness_channel(n, relax, m_eps, g.settings())
                         : gen_log_robustness_channel(n, relax, m_eps, g.settings());
          }
          rows.push_back(bounded_row(f.name, m, v, g, t0));
        }
      }
    };
  });

  // bracket
  auto* brk = app.add_subcommand("bracket", "certified lower and upper bounds on the one-shot cost");
  std::string b_channel, b_relax = "ppt-choi", b_plan;
  double b_eps = 0;
  int b_samples = 64, b_fsepp = 1000;
  brk->add_option("--channel", b_channel, "channel file")->required();
  brk->add_option("--epsilon", b_eps, "smoothing radius")->capture_default_str();
  brk->add_option("--relaxation", b_relax, "ppt-choi or sepp-sampled")->capture_default_str();
  brk->add_option("--samples", b_samples, "product inputs for sepp-sampled")->capture_default_str();
  brk->add_option("--fsepp-samples", b_fsepp, "samples for the FSEPP check of the plan")->capture_default_str();
  brk->add_option("--plan-out", b_plan, "where to store the plan (default: <out>.plan.json when --out is set)");
  brk->callback([&] {
    action = [&] {
      const auto f = read_channel(b_channel);
      const auto t0 = Clock::now();
      BracketOptions opt;
      opt.fsepp_samples = b_fsepp;
      opt.settings = g.settings();
      const auto relax = make_relaxation(b_relax, f.channel, b_samples, g.seed);
      const auto br = cost_bracket(f.channel, b_eps, relax, g.seed, opt);
      rows.push_back(bounded_row(f.name, "lower_bits", br.lower_certificate, g, t0));
      ReportRow up = rows.back();
      up.quantity = "upper_bits";
      up.value = format_number(br.upper_bits);
      up.direction = "upper";
      up.status = "certified";
      up.gap = 0;
      rows.push_back(up);
      for (auto& r : plan_rows(f.name, br.upper_certificate, g, t0)) {
        r.relaxation = up.relaxation;
        r.epsilon = b_eps;
        rows.push_back(r);
      }
      rows.push_back(fsepp_row(f.name, br.upper_certificate.fsepp, t0));
      const std::string plan_path = !b_plan.empty() ? b_plan : (!g.out.empty() ? g.out + ".plan.json" : "");
      if (!plan_path.empty())
        write_plan(plan_path, f.name, br.upper_certificate,
                   {{"epsilon", b_eps}, {"theorem1_note", br.theorem1_note}, {"lower_bits", br.lower_bits}});
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "build a simulating channel and verify it");
  std::string s_channel, s_method = "teleport", s_noise, s_write;
  int s_k = 2, s_fsepp = 0;
  sim->add_option("--channel", s_channel, "target channel file")->required();
  sim->add_option("--method", s_method, "teleport or theorem1")
      ->check(CLI::IsMember({"teleport", "theorem1"}))
      ->capture_default_str();
  sim->add_option("--k", s_k, "resource dimension K for theorem1")->capture_default_str();
  sim->add_option("--noise", s_noise, "channel applied off the resource (theorem1); default: replacer to I/d");
  sim->add_option("--write", s_write, "store the simulating channel");
  sim->add_option("--fsepp-samples", s_fsepp, "also run the FSEPP check with this many samples")->capture_default_str();
  sim->callback([&] {
    action = [&] {
      const auto f = read_channel(s_channel);
      const auto& n = f.channel;
      const auto t0 = Clock::now();
      SimulationPlan plan;
      if (s_method == "teleport") {
        plan = teleport_channel(n);
      } else {
        const ChoiChannel noise = s_noise.empty()
                                      ? replacer_channel(n.in_dims(), DensityMatrix::maximally_mixed(n.out_dims()))
                                      : read_channel(s_noise).channel;
        plan.method = PlanMethod::theorem1;
        plan.k = s_k;
        plan.ebits = std::log2(double(s_k));
        plan.lambda = s_k;
        plan.m = theorem1_channel(n, noise, s_k);
        plan.achieved_error = metrics::diamond_distance(simulated_channel(plan.m, s_k, n.in_dims()), n, g.settings())
                                  .half_distance;
        plan.certificate = "none (construction only)";
      }
      if (s_fsepp > 0) plan.fsepp = fsepp_sample_check(plan.m, s_fsepp, g.seed);
      for (auto& r : plan_rows(f.name, plan, g, t0)) {
        r.status = s_method == "teleport" ? "certified" : "constructed";
        rows.push_back(r);
      }
      if (s_fsepp > 0) rows.push_back(fsepp_row(f.name, plan.fsepp, t0));
      if (!s_write.empty()) write_plan(s_write, f.name, plan);
    };
  });

  // check-fsepp
  auto* chk = app.add_subcommand("check-fsepp", "sample product inputs of a simulating channel");
  std::string c_channel;
  int c_samples = 1000;
  double c_tol = 1e-8;
  chk->add_option("--channel", c_channel, "simulating channel file (inputs A, A', B, B')")->required();
  chk->add_option("--samples", c_samples, "number of product inputs")->capture_default_str();
  chk->add_option("--tol", c_tol, "PASS threshold on the worst eigenvalue")->capture_default_str();
  chk->callback([&] {
    action = [&] {
      if (c_samples < 1) throw InputError("--samples must be at least 1");
      const auto f = read_channel(c_channel);
      const auto& in = f.channel.in_dims();
      if (!in.contains("A'") || !in.contains("B'"))
        throw InputError("check-fsepp expects a simulating channel with A' and B' inputs");
      const auto t0 = Clock::now();
      const auto d = fsepp_sample_check(f.channel, c_samples, g.seed, c_tol);
      rows.push_back(fsepp_row(f.name, d, t0));
    };
  });

  // distance
  auto* dst = app.add_subcommand("distance", "half diamond distance between two channels");
  std::string d_a, d_b;
  dst->add_option("--channel", d_a, "first channel file")->required();
  dst->add_option("--other", d_b, "second channel file")->required();
  dst->callback([&] {
    action = [&] {
      const auto a = read_channel(d_a);
      const auto b = read_channel(d_b);
      const auto t0 = Clock::now();
      const auto r = metrics::diamond_distance(a.channel, b.channel, g.settings());
      ReportRow row;
      row.channel = a.name + "|" + b.name;
      row.quantity = "half_diamond";
      row.value = format_number(r.half_distance);
      row.direction = "exact";
      row.status = conic::to_string(r.status);
      row.gap = r.duality_gap;
      row.wall_ms = elapsed_ms(t0);
      row.seed = g.seed;
      rows.push_back(row);
    };
  });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    action();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }

  if (g.out.empty()) {
    write_tsv(out, rows, g.omit_timing);
  } else {
    std::ofstream file(g.out);
    if (!file) {
      err << "error: cannot write '" << g.out << "'\n";
      return kBadInput;
    }
    write_tsv(file, rows, g.omit_timing);
  }
  for (const auto& r : rows)
    if (is_failure(r)) {
      err << "solver failure: " << r.quantity << " " << r.status << '\n';
      return kSolverFailure;
    }
  return kOk;
}

}  // namespace entcost::app
