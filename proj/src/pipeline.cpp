#include "orlhom/pipeline.hpp"

#include "orlhom/config.hpp"
#include "orlhom/homogenize.hpp"
#include "orlhom/verify.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace orlhom {

namespace {

using nlohmann::json;

std::string sigma_csv_header(int N, int d) {
  std::string h;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < d; ++c) h += "s" + std::to_string(r) + std::to_string(c) + ",";
  return h;
}

std::string sigma_csv_row(const Mat& sigma) {
  std::string row;
  for (int r = 0; r < sigma.rows(); ++r)
    for (int c = 0; c < sigma.cols(); ++c) row += format_double(sigma(r, c)) + ",";
  return row;
}

std::string sigma_string(const Mat& sigma) {
  std::string s;
  for (int r = 0; r < sigma.rows(); ++r)
    for (int c = 0; c < sigma.cols(); ++c) {
      if (!s.empty()) s += " ";
      s += format_double(sigma(r, c));
    }
  return s;
}

json field_json(const LatticeField& f) {
  json j;
  j["dim"] = f.dim();
  json offset = json::array();
  for (int i = 0; i < f.dim(); ++i) offset.push_back(std::to_string(f.base_offset()[i]));
  j["offset"] = offset;
  if (f.kind() == LatticeField::Kind::Periodic) {
    j["kind"] = "periodic";
    json pattern = json::array();
    for (double v : f.pattern()) pattern.push_back(format_double(v));
    j["pattern"] = pattern;
    json period = json::array();
    for (int i = 0; i < f.dim(); ++i) period.push_back(std::to_string(f.period()[i]));
    j["period"] = period;
  } else {
    j["kind"] = "random";
    j["seed"] = std::to_string(f.seed());
    json values = json::array(), probs = json::array();
    for (const auto& e : f.palette().entries) {
      values.push_back(format_double(e.value));
      probs.push_back(format_double(e.probability));
    }
    j["values"] = values;
    j["probs"] = probs;
  }
  return j;
}

json spec_json(const IntegrandSpec& spec) {
  json j;
  switch (spec.family()) {
    case FamilyKind::PowerRadial: j["family"] = "power_radial"; break;
    case FamilyKind::VariableExponent: j["family"] = "variable_exponent"; break;
    case FamilyKind::DoublePhase: j["family"] = "double_phase"; break;
  }
  j["p_minus"] = format_double(spec.window().p_minus);
  j["p_plus"] = format_double(spec.window().p_plus);
  j["alpha"] = format_double(spec.alpha());
  j["beta"] = format_double(spec.beta());
  json fields = json::array();
  for (const LatticeField* f : spec.fields()) fields.push_back(field_json(*f));
  j["fields"] = fields;
  return j;
}

json solver_json(const SolverConfig& sc) {
  json j;
  j["tol_g"] = format_double(sc.tol_g);
  j["tol_e"] = format_double(sc.tol_e);
  j["max_iter"] = sc.max_iter;
  j["memory"] = sc.memory;
  j["multistart_count"] = sc.multistart_count;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << text;
}

int resolve_jobs(const ConfigFile& cfg, int jobs_override) {
  int jobs = jobs_override > 0 ? jobs_override
                               : static_cast<int>(cfg.get_int_or("run", "jobs", 0));
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 0) jobs = 1;
  if (const char* env = std::getenv("ORLHOM_JOBS")) {
    int cap = std::atoi(env);
    if (cap > 0) jobs = std::min(jobs, cap);
  }
  return jobs;
}

struct PipelineContext {
  ConfigFile cfg;
  MeshParams mp;
  SolverConfig solver;
  int jobs = 1;
  json manifest;
  std::string out_path;
};

void finish_manifest(PipelineContext& ctx) {
  write_text(ctx.out_path + ".manifest.json", ctx.manifest.dump(2) + "\n");
}

int run_gamma(PipelineContext& ctx, const IntegrandSpec& spec) {
  auto sigmas = sigmas_from_config(ctx.cfg, ctx.mp.N, ctx.mp.d);
  std::vector<HomogSample> samples(sigmas.size());
  parallel_for(sigmas.size(), ctx.jobs, [&](std::size_t i) {
    samples[i] = gamma_cell(spec, sigmas[i], ctx.mp.n, ctx.solver);
  });

  std::string csv = sigma_csv_header(ctx.mp.N, ctx.mp.d) + "value,converged,iterations,grad_norm\n";
  json outcomes = json::array();
  bool all_converged = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    csv += sigma_csv_row(s.sigma) + format_double(s.value) + "," +
           (s.report.converged ? "1" : "0") + "," + std::to_string(s.report.iterations) + "," +
           format_double(s.report.grad_norm) + "\n";
    json o;
    o["sigma"] = sigma_string(s.sigma);
    o["value"] = format_double(s.value);
    o["converged"] = s.report.converged;
    outcomes.push_back(o);
    all_converged = all_converged && s.report.converged;
  }
  write_text(ctx.out_path, csv);
  ctx.manifest["outcomes"] = outcomes;
  finish_manifest(ctx);
  return all_converged ? 0 : 1;
}

int run_stochastic(PipelineContext& ctx, const IntegrandSpec& spec, const NonconvexSpec* bump) {
  auto sigmas = sigmas_from_config(ctx.cfg, ctx.mp.N, ctx.mp.d);
  auto t_list = t_list_from_config(ctx.cfg);
  auto seeds = seeds_from_config(ctx.cfg);

  std::vector<StochasticEstimate> estimates;
  estimates.reserve(sigmas.size());
  for (const Mat& sigma : sigmas) {
    if (bump != nullptr)
      estimates.push_back(phi_estimate(*bump, sigma, t_list, seeds, ctx.mp.n, ctx.solver, ctx.jobs));
    else
      estimates.push_back(zeta_estimate(spec, sigma, t_list, seeds, ctx.mp.n, ctx.solver, ctx.jobs));
  }

  std::string csv = sigma_csv_header(ctx.mp.N, ctx.mp.d) +
                    "t,seed,value,kind,converged,iterations,grad_norm\n";
  json outcomes = json::array();
  bool all_converged = true;
  for (const auto& est : estimates) {
    const char* kind = est.upper_bound ? "upper_bound" : "estimate";
    for (const auto& e : est.entries) {
      csv += sigma_csv_row(est.sigma) + std::to_string(e.t) + "," + std::to_string(e.seed) + "," +
             format_double(e.value) + "," + kind + "," + (e.report.converged ? "1" : "0") + "," +
             std::to_string(e.report.iterations) + "," + format_double(e.report.grad_norm) + "\n";
      all_converged = all_converged && e.report.converged;
    }
    json o;
    o["sigma"] = sigma_string(est.sigma);
    o["kind"] = kind;
    o["point_estimate"] = format_double(est.point_estimate);
    json per_t = json::array();
    for (const auto& st : est.per_t) {
      json pt;
      pt["t"] = st.t;
      pt["mean"] = format_double(st.mean);
      pt["std_error"] = format_double(st.std_error);
      pt["count"] = st.count;
      per_t.push_back(pt);
    }
    o["per_t"] = per_t;
    json trend = json::array();
    for (double d : est.trend) trend.push_back(format_double(d));
    o["trend"] = trend;
    outcomes.push_back(o);
  }
  write_text(ctx.out_path, csv);
  json seeds_json = json::array();
  for (auto s : seeds) seeds_json.push_back(std::to_string(s));
  ctx.manifest["seeds"] = seeds_json;
  ctx.manifest["outcomes"] = outcomes;
  finish_manifest(ctx);
  return all_converged ? 0 : 1;
}

int run_verify(PipelineContext& ctx, const IntegrandSpec& spec) {
  auto sigmas = sigmas_from_config(ctx.cfg, ctx.mp.N, ctx.mp.d);

  int suite_samples = static_cast<int>(ctx.cfg.get_int_or("run", "suite_samples", 50));
  std::uint64_t suite_seed = static_cast<std::uint64_t>(ctx.cfg.get_int_or("run", "suite_seed", 7));

  GammaSampler sampler = memoized_gamma_sampler(spec, ctx.mp.n, ctx.solver);
  double margin = refinement_margin(spec, sigmas.front(), ctx.mp.n, ctx.solver);
  double tol = margin + 1e-6;

  SuiteInputs inputs;
  inputs.sigma_list = sigmas;
  std::uint64_t h = suite_seed;
  const int N = ctx.mp.N, d = ctx.mp.d;
  while (static_cast<int>(inputs.sigma_list.size()) < std::max(8, suite_samples / 4)) {
    Mat s(N, d);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < d; ++c) {
        h = mix64(h);
        s(r, c) = 2.0 * uniform01(h) - 1.0;
      }
    inputs.sigma_list.push_back(s);
  }
  inputs.A_list.push_back(0.5 * Mat::Identity(N, N));
  inputs.A_list.push_back(2.0 * Mat::Identity(N, N));
  if (N == 2) {
    Mat rot(2, 2);
    rot << 0.6, -0.8, 0.8, 0.6;
    inputs.A_list.push_back(rot);
  }
  while (static_cast<int>(inputs.A_list.size() * inputs.sigma_list.size()) < suite_samples) {
    Mat A(N, N);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        h = mix64(h);
        A(r, c) = 2.0 * uniform01(h) - 1.0;
      }
    inputs.A_list.push_back(A);
  }
  inputs.t_list = {0.5, 1.5, 2.0, 3.0};

  auto reports = structural_suite(sampler, spec.window(), spec.alpha(), spec.beta(), inputs, tol);

  std::string csv = "property,samples,worst_violation,tol,pass\n";
  json props = json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    csv += r.property + "," + std::to_string(r.samples) + "," + format_double(r.worst_violation) +
           "," + format_double(r.tol) + "," + (r.pass ? "1" : "0") + "\n";
    json p;
    p["property"] = r.property;
    p["samples"] = r.samples;
    p["worst_violation"] = format_double(r.worst_violation);
    p["tol"] = format_double(r.tol);
    p["pass"] = r.pass;
    if (!r.note.empty()) p["note"] = r.note;
    props.push_back(p);
    if (!r.pass) std::cerr << "property violation: " << r.property << " worst=" << r.worst_violation
                           << " tol=" << r.tol << "\n";
    all_pass = all_pass && r.pass;
  }
  write_text(ctx.out_path, csv);
  ctx.manifest["properties"] = props;
  ctx.manifest["refinement_margin"] = format_double(margin);
  finish_manifest(ctx);
  return all_pass ? 0 : 1;
}

int run_oracle(PipelineContext& ctx) {
  std::string problem = ctx.cfg.get_or("run", "oracle_problem", "oned_power");
  auto values = ctx.cfg.has("field", "pattern") ? ctx.cfg.get_list("field", "pattern")
                                                : ctx.cfg.get_list("field", "values");
  std::vector<double> weights(values.size(), 1.0 / static_cast<double>(values.size()));
  if (ctx.cfg.has("field", "weights")) weights = ctx.cfg.get_list("field", "weights");
  if (ctx.cfg.has("field", "probs")) weights = ctx.cfg.get_list("field", "probs");

  std::string csv = "name,value\n";
  json outcomes = json::array();
  if (problem == "oned_power") {
    double p = ctx.cfg.get_double("integrand", "p");
    double a_hom = oned_power_effective(weights, values, p);
    csv += "a_hom," + format_double(a_hom) + "\n";
    outcomes.push_back({{"name", "a_hom"}, {"value", format_double(a_hom)}});
  } else if (problem == "laminate_quadratic") {
    LaminatePair pair = laminate_quadratic_effective(weights, values);
    csv += "along," + format_double(pair.along) + "\n";
    csv += "across," + format_double(pair.across) + "\n";
    outcomes.push_back({{"name", "along"}, {"value", format_double(pair.along)}});
    outcomes.push_back({{"name", "across"}, {"value", format_double(pair.across)}});
  } else {
    throw ConfigError("oracle: unsupported problem '" + problem + "'");
  }
  write_text(ctx.out_path, csv);
  ctx.manifest["outcomes"] = outcomes;
  finish_manifest(ctx);
  return 0;
}

int run_luxemburg(PipelineContext& ctx, const IntegrandSpec& spec) {
  auto sigmas = sigmas_from_config(ctx.cfg, ctx.mp.N, ctx.mp.d);

  std::string csv = sigma_csv_header(ctx.mp.N, ctx.mp.d) + "modular,luxemburg\n";
  json outcomes = json::array();
  for (const Mat& sigma : sigmas) {
    // constant matrix field over (0,t)^d, one piece per unit field cell
    PiecewiseMatrixField field;
    long cells = 1;
    for (int i = 0; i < ctx.mp.d; ++i) cells *= ctx.mp.t;
    for (long flat = 0; flat < cells; ++flat) {
      PiecewiseMatrixField::Piece piece;
      piece.measure = 1.0;
      long rem = flat;
      for (int i = ctx.mp.d - 1; i >= 0; --i) {
        piece.point[i] = static_cast<double>(rem % ctx.mp.t) + 0.5;
        rem /= ctx.mp.t;
      }
      piece.value = sigma;
      field.pieces.push_back(piece);
    }
    double mod = modular(spec, field);
    double lux = luxemburg_norm(spec, field);
    csv += sigma_csv_row(sigma) + format_double(mod) + "," + format_double(lux) + "\n";
    json o;
    o["sigma"] = sigma_string(sigma);
    o["modular"] = format_double(mod);
    o["luxemburg"] = format_double(lux);
    outcomes.push_back(o);
  }
  write_text(ctx.out_path, csv);
  ctx.manifest["outcomes"] = outcomes;
  finish_manifest(ctx);
  return 0;
}

}  // namespace

int run_pipeline(const std::string& command, const std::string& config_path,
                 const std::string& out_path, int jobs_override) {
  PipelineContext ctx;
  try {
    ctx.cfg = ConfigFile::parse_file(config_path);
    ctx.mp = mesh_from_config(ctx.cfg);
    ctx.solver = solver_from_config(ctx.cfg);
    ctx.jobs = resolve_jobs(ctx.cfg, jobs_override);
    ctx.out_path = out_path;

    ctx.manifest["tool"] = "orlhom";
    ctx.manifest["version"] = kVersion;
    ctx.manifest["command"] = command;
    ctx.manifest["config_digest"] = ctx.cfg.digest();
    json mesh;
    mesh["d"] = ctx.mp.d;
    mesh["N"] = ctx.mp.N;
    mesh["n"] = ctx.mp.n;
    mesh["t"] = ctx.mp.t;
    ctx.manifest["mesh"] = mesh;
    ctx.manifest["solver"] = solver_json(ctx.solver);

    if (command == "oracle") return run_oracle(ctx);

    const bool nonconvex = command == "phi";
    NonconvexSpec bump = nonconvex ? nonconvex_from_config(ctx.cfg)
                                   : NonconvexSpec::sine_bump(integrand_from_config(ctx.cfg), 0.0);
    const IntegrandSpec& spec = bump.base;
    ctx.manifest["integrand"] = spec_json(spec);
    if (nonconvex) ctx.manifest["lambda"] = format_double(bump.lambda);

    // Pre-flight: the integrand validators gate every command.
    StructureReport structure = validate_structure(
        spec, static_cast<int>(ctx.cfg.get_int_or("run", "sample_budget", 400)));
    if (!structure.pass) {
      std::cerr << "invalid config: integrand structure validation failed:\n";
      for (const auto& c : structure.checks)
        if (!c.pass)
          std::cerr << "  " << c.name << " violated, worst margin " << c.worst_margin << "\n";
      return 2;
    }

    if (command == "gamma") return run_gamma(ctx, spec);
    if (command == "zeta") return run_stochastic(ctx, spec, nullptr);
    if (command == "phi") return run_stochastic(ctx, spec, &bump);
    if (command == "verify") return run_verify(ctx, spec);
    if (command == "luxemburg") return run_luxemburg(ctx, spec);
    std::cerr << "unknown command '" << command << "'\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace orlhom
