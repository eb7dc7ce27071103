#include "monoloc/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "monoloc/errors.hpp"

namespace monoloc {

using nlohmann::json;

std::string method_name(Method method) {
  switch (method) {
    case Method::SSCE:
      return "ssce";
    case Method::LSE:
      return "lse";
    case Method::SmoothedScore:
      return "smoothed_score";
  }
  return "?";
}

std::string direction_name(Direction direction) {
  return direction == Direction::NonIncreasing ? "dec" : "inc";
}

SensorDataset read_sensor_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_sensor_csv: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw EmptyInput("read_sensor_csv: empty file " + path);

  std::vector<std::string> columns;
  {
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) columns.push_back(cell);
  }
  if (columns.size() < 2 || columns.back() != "y")
    throw std::runtime_error("read_sensor_csv: expected header x1,...,xd,y in " + path);
  const auto d = static_cast<Eigen::Index>(columns.size() - 1);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != columns.size())
      throw std::runtime_error("read_sensor_csv: row width mismatch in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyInput("read_sensor_csv: no sensor rows in " + path);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    y[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return SensorDataset::with_default_box(std::move(x), std::move(y));
}

void write_sensor_csv(const std::string& path, const SensorDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sensor_csv: cannot open " + path);
  out.precision(17);
  for (int j = 0; j < data.d(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << data.x(i, j) << ",";
    out << data.y[i] << "\n";
  }
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json eta_json(const MonotoneStepFunction& eta) {
  return json{{"knots", eta.knots},
              {"values", eta.values},
              {"direction", direction_name(eta.direction)},
              {"domain_upper", eta.domain_upper}};
}

json ellipsoid_json(const Ellipsoid& e) {
  return json{{"level", e.level},
              {"center", vector_json(e.center)},
              {"shape", matrix_json(e.shape)},
              {"radius", e.radius},
              {"rank", e.rank}};
}

json summary_json(const BootstrapSummary& summary) {
  json ellipsoids = json::array();
  for (const Ellipsoid& e : summary.ellipsoids) ellipsoids.push_back(ellipsoid_json(e));
  int B = static_cast<int>(summary.replicates.rows());
  return json{{"method", summary.method == BootstrapMethod::MOutOfN ? "m_out_of_n" : "wild"},
              {"m", summary.m},
              {"B", B},
              {"effective_B", summary.effective_B},
              {"center", vector_json(summary.center)},
              {"covariance", matrix_json(summary.covariance)},
              {"ellipsoids", ellipsoids}};
}

}  // namespace

json fit_report(const LocationEstimate& estimate, const SensorDataset& data) {
  return json{{"schema", kReportSchema},
              {"command", "fit"},
              {"method", method_name(estimate.method)},
              {"direction", direction_name(estimate.direction)},
              {"theta", vector_json(estimate.theta)},
              {"objective", estimate.objective_at_solution},
              {"sse", estimate.sse},
              {"eta", eta_json(estimate.eta)},
              {"converged", estimate.converged},
              {"evaluations", estimate.evaluations},
              {"n", data.n()},
              {"d", data.d()}};
}

json bootstrap_report(const BootstrapSummary& summary, const EstimatorSpec& spec,
                      const SensorDataset& data) {
  json out = summary_json(summary);
  out["schema"] = kReportSchema;
  out["command"] = "bootstrap";
  out["estimator"] = method_name(spec.method);
  out["direction"] = direction_name(spec.direction);
  out["n"] = data.n();
  out["d"] = data.d();
  return out;
}

json frame_report(const PipelineReport& report) {
  json channels = json::array();
  for (const ChannelReport& ch : report.channels) {
    json c{{"label", ch.label}, {"ok", ch.ok}};
    if (!ch.error.empty()) c["error"] = ch.error;
    if (ch.ok || ch.estimate.theta.size() > 0) {
      c["theta"] = vector_json(ch.estimate.theta);
      c["direction"] = direction_name(ch.direction);
      c["sse_dec"] = ch.sse_nonincreasing;
      c["sse_inc"] = ch.sse_nondecreasing;
      c["objective"] = ch.estimate.objective_at_solution;
      c["eta"] = eta_json(ch.estimate.eta);
      c["bootstrap"] = summary_json(ch.bootstrap);
      if (ch.score_norms.size() > 0) {
        c["score_field"] = json{{"locations", matrix_json(ch.score_locations)},
                                {"norms", vector_json(ch.score_norms)}};
      }
    }
    channels.push_back(std::move(c));
  }
  return json{{"schema", kReportSchema},
              {"command", "frame"},
              {"seed", report.seed},
              {"subsample", report.subsample},
              {"background_frames", report.background_frames},
              {"all_converged", report.all_converged},
              {"channels", channels}};
}

namespace {

AttenuationSpec attenuation_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "inverse_poly")
    return AttenuationSpec::inverse_poly(j.value("a", 5.0), j.value("b", 5.0), j.value("p", 3.0));
  if (kind == "exp_decay") return AttenuationSpec::exp_decay(j.value("a", 5.0), j.value("b", 4.0));
  if (kind == "trunc_linear")
    return AttenuationSpec::trunc_linear(j.value("a", 5.0), j.value("c", 10.0));
  if (kind == "rational_simple") return AttenuationSpec::rational_simple();
  throw std::runtime_error("scenario: unknown attenuation kind " + kind);
}

CovariateSpec covariates_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "unif_box")
    return CovariateSpec::unif_box(j.value("lo", -3.0), j.value("hi", 3.0), j.value("d", 2));
  if (kind == "correlated_unif") return CovariateSpec::correlated_unif();
  if (kind == "gaussian_iso") return CovariateSpec::gaussian_iso(j.value("d", 2));
  throw std::runtime_error("scenario: unknown covariate kind " + kind);
}

ErrorSpec errors_from_json(const json& j) {
  std::string base = j.at("base").get<std::string>();
  ErrorSpec e;
  if (base == "normal")
    e = ErrorSpec::normal(j.value("sigma", 1.0));
  else if (base == "signed_beta")
    e = ErrorSpec::signed_beta();
  else if (base == "student_t")
    e = ErrorSpec::student_t(j.value("nu", 3));
  else
    throw std::runtime_error("scenario: unknown error base " + base);
  e.hetero = j.value("hetero", false);
  e.beta_literal_sign = j.value("literal_sign", false);
  e.moment_order_q = j.value("q", 6);
  return e;
}

}  // namespace

ScenarioFile read_scenario_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_scenario_json: cannot open " + path);
  json j = json::parse(in);

  ScenarioFile file;
  file.study = j.value("study", std::string("variance"));
  file.scenario.attenuation = attenuation_from_json(j.at("attenuation"));
  file.scenario.covariates = covariates_from_json(j.at("covariates"));
  file.scenario.errors = errors_from_json(j.at("errors"));
  std::vector<double> theta0 = j.at("theta0").get<std::vector<double>>();
  file.scenario.theta0 =
      Eigen::Map<Eigen::VectorXd>(theta0.data(), static_cast<Eigen::Index>(theta0.size()));
  file.scenario.replications = j.value("replications", 200);
  file.scenario.seed = j.value("seed", std::uint64_t{1});
  file.scenario.label = j.value("label", std::string{});

  if (j.at("n").is_array())
    file.n_list = j.at("n").get<std::vector<int>>();
  else
    file.n_list = {j.at("n").get<int>()};
  file.scenario.n = file.n_list.front();

  if (j.contains("methods")) {
    file.methods.clear();
    for (const auto& name : j.at("methods")) {
      std::string s = name.get<std::string>();
      if (s == "ssce")
        file.methods.push_back(Method::SSCE);
      else if (s == "lse")
        file.methods.push_back(Method::LSE);
      else
        throw std::runtime_error("scenario: unknown method " + s);
    }
  }
  if (j.contains("bootstrap")) {
    const json& b = j.at("bootstrap");
    file.bootstrap.B = b.value("B", 200);
    file.bootstrap.m_exponent = b.value("m_exp", 0.875);
    file.bootstrap.wild = b.value("wild", false);
  }
  file.level = j.value("level", 0.90);
  return file;
}

std::string variance_rows_csv(const std::vector<VarianceStudyRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "scenario,n,method,replications,failures,scaled_variance,bias,"
         "median_abs_error,kink_flag\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.n << ',' << method_name(r.method) << ',' << r.replications
        << ',' << r.failures << ',' << r.scaled_variance << ',' << r.bias << ','
        << r.median_abs_error << ',' << (r.kink_flag ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string coverage_rows_csv(const std::vector<CoverageStudyRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "scenario,n,datasets,level,bootstrap,m,coverage_normal,"
         "coverage_percentile,failures,kink_flag\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.n << ',' << r.datasets << ',' << r.level << ','
        << (r.wild ? "wild" : "m_out_of_n") << ',' << r.m << ',' << r.coverage_normal << ','
        << r.coverage_percentile << ',' << r.failures << ',' << (r.kink_flag ? 1 : 0) << '\n';
  }
  return out.str();
}

json variance_rows_json(const std::vector<VarianceStudyRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    a.push_back(json{{"scenario", r.scenario},
                     {"n", r.n},
                     {"method", method_name(r.method)},
                     {"replications", r.replications},
                     {"failures", r.failures},
                     {"scaled_variance", r.scaled_variance},
                     {"bias", r.bias},
                     {"median_abs_error", r.median_abs_error},
                     {"kink_flag", r.kink_flag}});
  }
  return json{{"schema", kReportSchema}, {"study", "variance"}, {"rows", a}};
}

json coverage_rows_json(const std::vector<CoverageStudyRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    a.push_back(json{{"scenario", r.scenario},
                     {"n", r.n},
                     {"datasets", r.datasets},
                     {"level", r.level},
                     {"bootstrap", r.wild ? "wild" : "m_out_of_n"},
                     {"m", r.m},
                     {"coverage_normal", r.coverage_normal},
                     {"coverage_percentile", r.coverage_percentile},
                     {"failures", r.failures},
                     {"kink_flag", r.kink_flag}});
  }
  return json{{"schema", kReportSchema}, {"study", "coverage"}, {"rows", a}};
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << contents;
}

}  // namespace monoloc
