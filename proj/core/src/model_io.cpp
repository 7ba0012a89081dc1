#include "slim/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace slim::model_io {

namespace {

using nlohmann::json;

json to_json(const Vector& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& a, const char* field) {
  if (!a.is_array())
    throw std::runtime_error(std::string("model_io: '") + field +
                             "' is not an array");
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

json load_checked(const std::string& path, const char* expect_format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != expect_format)
    throw std::runtime_error("'" + path + "' is not a " +
                             std::string(expect_format) + " file");
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path +
                                     "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace

void save_model(const SlimModel& model, const std::string& path) {
  json j;
  j["format"] = "slim-model";
  j["version"] = 1;
  j["p"] = model.p;
  j["gamma"] = model.fit_metadata.gamma;
  j["sigma_y_hat"] = model.coefficients.sigma_y_hat;
  j["theta_check"] = to_json(model.coefficients.theta_check);
  j["theta_hat"] = to_json(model.coefficients.theta_hat);
  j["support"] = model.coefficients.support;
  json transforms = json::array();
  for (const auto& [feature, table] : model.transforms) {
    json t;
    t["feature"] = feature;
    t["knots"] = table.knots;
    t["values"] = table.values;
    transforms.push_back(std::move(t));
  }
  j["transforms"] = std::move(transforms);
  j["solver_iterations"] = model.fit_metadata.solver_iterations;
  j["solver_converged"] = model.fit_metadata.solver_converged;
  j["backfit_rounds"] = model.fit_metadata.backfit_rounds;
  j["objective_history"] = model.fit_metadata.objective_history;
  j["warnings"] = model.fit_metadata.warnings;
  write_json(j, path);
}

SlimModel load_model(const std::string& path) {
  json j = load_checked(path, "slim-model");
  SlimModel model;
  try {
    model.p = j.at("p").get<int>();
    model.fit_metadata.gamma = j.at("gamma").get<double>();
    model.coefficients.sigma_y_hat = j.at("sigma_y_hat").get<double>();
    model.coefficients.theta_check =
        vector_from(j.at("theta_check"), "theta_check");
    model.coefficients.theta_hat = vector_from(j.at("theta_hat"),
                                               "theta_hat");
    model.coefficients.support = j.at("support").get<std::vector<int>>();
    for (const auto& t : j.at("transforms")) {
      TransformTable table;
      table.knots = t.at("knots").get<std::vector<double>>();
      table.values = t.at("values").get<std::vector<double>>();
      model.transforms.emplace(t.at("feature").get<int>(), std::move(table));
    }
    model.fit_metadata.solver_iterations =
        j.value("solver_iterations", 0);
    model.fit_metadata.solver_converged = j.value("solver_converged", true);
    model.fit_metadata.backfit_rounds = j.value("backfit_rounds", 0);
    if (j.contains("objective_history"))
      model.fit_metadata.objective_history =
          j["objective_history"].get<std::vector<double>>();
    if (j.contains("warnings"))
      model.fit_metadata.warnings =
          j["warnings"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': malformed model: " + e.what());
  }
  if (model.coefficients.theta_hat.size() != model.p ||
      model.coefficients.theta_check.size() != model.p)
    throw std::runtime_error("'" + path +
                             "': coefficient length disagrees with p");
  for (int s : model.coefficients.support)
    if (s < 0 || s >= model.p || !model.transforms.count(s))
      throw std::runtime_error("'" + path +
                               "': support entry without a transform table");
  return model;
}

void save_truth(const synth::GroundTruth& truth, const std::string& path,
                int sigma_limit) {
  json j;
  j["format"] = "slim-truth";
  j["version"] = 1;
  int p = static_cast<int>(truth.theta_tilde.size());
  j["p"] = p;
  int s = 0;
  for (long i = 0; i < truth.theta_tilde.size(); ++i)
    if (truth.theta_tilde(i) != 0.0) ++s;
  j["s"] = s;
  j["seed"] = truth.seed;
  j["noise_variance"] = truth.noise_variance;
  j["sigma_y"] = truth.sigma_y();
  j["theta_tilde"] = to_json(truth.theta_tilde);
  json names = json::array();
  for (auto kind : truth.transform_ids)
    names.push_back(synth::transform_name(kind));
  j["transforms"] = std::move(names);
  if (p <= sigma_limit) {
    json rows = json::array();
    for (int i = 0; i < p; ++i) rows.push_back(to_json(truth.sigma_tilde.row(i)));
    j["sigma_tilde"] = std::move(rows);
  }
  write_json(j, path);
}

TruthInfo load_truth(const std::string& path) {
  json j = load_checked(path, "slim-truth");
  TruthInfo info;
  try {
    info.p = j.at("p").get<int>();
    info.theta_tilde = vector_from(j.at("theta_tilde"), "theta_tilde");
    info.noise_variance = j.at("noise_variance").get<double>();
    info.seed = j.at("seed").get<std::uint64_t>();
    info.sigma_y = j.at("sigma_y").get<double>();
    for (const auto& name : j.at("transforms")) {
      auto kind = synth::transform_from_name(name.get<std::string>());
      if (!kind)
        throw std::runtime_error("unknown transform '" +
                                 name.get<std::string>() + "'");
      info.transform_ids.push_back(*kind);
    }
    if (j.contains("sigma_tilde")) {
      const auto& rows = j["sigma_tilde"];
      info.sigma_tilde.resize(info.p, info.p);
      for (int i = 0; i < info.p; ++i) {
        Vector row = vector_from(rows.at(i), "sigma_tilde");
        if (row.size() != info.p)
          throw std::runtime_error("sigma_tilde row length mismatch");
        info.sigma_tilde.row(i) = row;
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': malformed truth: " + e.what());
  }
  return info;
}

} // namespace slim::model_io
