#ifndef PRESERVERS_IO_HPP
#define PRESERVERS_IO_HPP

#include <string>

#include "json.hpp"

#include "preservers/classify.hpp"
#include "preservers/genfuzz.hpp"

namespace preservers {

// JSON entry encoding: real matrices use plain numbers, complex ones
// [re, im] pairs. A matrix is an array of rows.
nlohmann::json mat_to_json(const Mat& a);
Mat mat_from_json(const nlohmann::json& j, Field field);

// Map files carry {m, n, r, s, field, images}.
nlohmann::json map_to_json(const LinMap& phi);
LinMap map_from_json(const nlohmann::json& j);

// Canonical files carry {m, n, r, s, field, U, V, Q1, Q2}.
nlohmann::json canonical_to_json(const CanonicalForm& c);
CanonicalForm canonical_from_json(const nlohmann::json& j);

nlohmann::json failure_to_json(const DecomposeFailure& f, Field field);

nlohmann::json verdict_to_json(const ClassifierVerdict& v, Field field);

nlohmann::json report_to_json(const FuzzReport& r);

LinMap read_map_file(const std::string& path);

}  // namespace preservers

#endif
