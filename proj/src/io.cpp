#include "preservers/io.hpp"

#include <fstream>

namespace preservers {

using nlohmann::json;

namespace {

json entry_to_json(cxd v, Field field) {
  if (field == Field::Real) return v.real();
  return json::array({v.real(), v.imag()});
}

cxd entry_from_json(const json& j, Field field) {
  if (field == Field::Real) {
    if (!j.is_number()) throw std::invalid_argument("real entry must be a number");
    return cxd(j.get<double>(), 0.0);
  }
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("complex entry must be a [re, im] pair");
  return cxd(j[0].get<double>(), j[1].get<double>());
}

std::string field_name(Field f) {
  return f == Field::Real ? "real" : "complex";
}

Field field_from_json(const json& j) {
  std::string s = j.at("field").get<std::string>();
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  throw std::invalid_argument("field must be \"real\" or \"complex\"");
}

std::vector<double> positive_list(const json& j, const char* what) {
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number() || v.get<double>() <= 0.0)
      throw std::invalid_argument(std::string(what) + " entries must be positive numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

json mat_to_json(const Mat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      row.push_back(entry_to_json(a.a(i, j), a.field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j, Field field) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw std::invalid_argument("matrix must be a non-empty array of rows");
  Eigen::Index m = static_cast<Eigen::Index>(j.size());
  Eigen::Index n = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != n)
      throw std::invalid_argument("ragged matrix rows");
    for (Eigen::Index k = 0; k < n; ++k) a(i, k) = entry_from_json(j[i][k], field);
  }
  return Mat(field, std::move(a));
}

json map_to_json(const LinMap& phi) {
  json images = json::array();
  for (const Mat& im : phi.images) images.push_back(mat_to_json(im));
  return json{{"m", phi.m},
              {"n", phi.n},
              {"r", phi.r},
              {"s", phi.s},
              {"field", field_name(phi.field)},
              {"images", std::move(images)}};
}

LinMap map_from_json(const json& j) {
  Field field = field_from_json(j);
  int m = j.at("m").get<int>(), n = j.at("n").get<int>();
  int r = j.at("r").get<int>(), s = j.at("s").get<int>();
  std::vector<Mat> images;
  for (const json& im : j.at("images")) images.push_back(mat_from_json(im, field));
  return from_images(m, n, r, s, field, std::move(images));
}

json canonical_to_json(const CanonicalForm& c) {
  return json{{"m", c.m},
              {"n", c.n},
              {"r", c.r},
              {"s", c.s},
              {"field", field_name(c.field)},
              {"U", mat_to_json(c.U)},
              {"V", mat_to_json(c.V)},
              {"Q1", c.q1},
              {"Q2", c.q2}};
}

CanonicalForm canonical_from_json(const json& j) {
  CanonicalForm c;
  c.field = field_from_json(j);
  c.m = j.at("m").get<int>();
  c.n = j.at("n").get<int>();
  c.r = j.at("r").get<int>();
  c.s = j.at("s").get<int>();
  c.U = mat_from_json(j.at("U"), c.field);
  c.V = mat_from_json(j.at("V"), c.field);
  c.q1 = positive_list(j.at("Q1"), "Q1");
  c.q2 = positive_list(j.at("Q2"), "Q2");
  c.validate();
  return c;
}

json failure_to_json(const DecomposeFailure& f, Field field) {
  const char* kind = f.kind == FailureKind::NotPreserver ? "NotPreserver"
                     : f.kind == FailureKind::DegenerateDomain
                         ? "DegenerateDomain"
                         : "NumericalBreakdown";
  json out{{"kind", kind}, {"residual", f.residual}};
  if (f.witness) {
    out["witness"] =
        json::array({mat_to_json(f.witness->first), mat_to_json(f.witness->second)});
  }
  (void)field;
  return out;
}

json verdict_to_json(const ClassifierVerdict& v, Field field) {
  const char* verdict = v.verdict == Verdict::Yes   ? "Yes"
                        : v.verdict == Verdict::No ? "No"
                                                   : "Inapplicable";
  json out{{"verdict", verdict}, {"detail", v.detail}};
  if (v.certificate) out["certificate"] = canonical_to_json(*v.certificate);
  if (!v.witness.empty()) {
    json w = json::array();
    for (const Mat& x : v.witness) w.push_back(mat_to_json(x));
    out["witness"] = std::move(w);
  }
  (void)field;
  return out;
}

json report_to_json(const FuzzReport& r) {
  json props = json::array();
  for (const PropertyResult& p : r.properties) {
    props.push_back(json{{"name", p.name},
                         {"trials", p.trials},
                         {"failures", p.failures},
                         {"first_counterexample", p.first_counterexample}});
  }
  return json{{"config",
               json{{"trials", r.config.trials},
                    {"max_dim", r.config.max_dim},
                    {"seed", r.config.seed}}},
              {"properties", std::move(props)},
              {"total_failures", r.total_failures}};
}

LinMap read_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  return map_from_json(j);
}

}  // namespace preservers
