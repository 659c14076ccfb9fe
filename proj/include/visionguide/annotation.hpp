#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "visionguide/error.hpp"

namespace visionguide {

/// Ground-truth marker: centre (x = column, y = row, pixel-centred) and radius.
struct CircleAnnotation {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;

    friend bool operator==(const CircleAnnotation&, const CircleAnnotation&) = default;
};

/// Throws InvariantViolation unless radius > 0 and the centre lies within the
/// [0, width] x [0, height] extent of the image.
inline void validate_annotation(const CircleAnnotation& a, int width, int height,
                                const std::string& source) {
    if (!(a.radius > 0.0) || !std::isfinite(a.radius)) {
        throw InvariantViolation(source + ": annotation radius must be > 0");
    }
    if (!(a.x >= 0.0 && a.x <= width && a.y >= 0.0 && a.y <= height)) {
        throw InvariantViolation(source + ": annotation centre (" + std::to_string(a.x) + ", " +
                                 std::to_string(a.y) + ") outside the " + std::to_string(width) +
                                 "x" + std::to_string(height) + " image");
    }
}

namespace detail {

inline double number_field(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& source) {
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it == obj.end()) continue;
        if (!it->is_number()) throw MalformedJson(source + ": field '" + k + "' is not a number");
        return it->get<double>();
    }
    throw MalformedJson(source + ": annotation missing field '" + *keys.begin() + "'");
}

}  // namespace detail

/// Reads the annotation sidecar: {"artcodes": [{"x", "y", "radius"}, ...]}.
/// The alias keys {"cx", "cy", "r"} are accepted as well.
inline std::vector<CircleAnnotation> parse_annotations(const std::string& text,
                                                       const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedJson(source + ": " + e.what());
    }
    if (!doc.is_object()) throw MalformedJson(source + ": top level must be an object");
    auto it = doc.find("artcodes");
    if (it == doc.end() || !it->is_array()) {
        throw MalformedJson(source + ": missing 'artcodes' array");
    }
    std::vector<CircleAnnotation> out;
    for (const auto& item : *it) {
        if (!item.is_object()) throw MalformedJson(source + ": annotation entries must be objects");
        out.push_back({detail::number_field(item, {"x", "cx"}, source),
                       detail::number_field(item, {"y", "cy"}, source),
                       detail::number_field(item, {"radius", "r"}, source)});
    }
    return out;
}

inline std::vector<CircleAnnotation> read_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingAnnotation("cannot open annotation file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_annotations(ss.str(), path);
}

inline nlohmann::json annotations_to_json(const std::vector<CircleAnnotation>& anns) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : anns) arr.push_back({{"x", a.x}, {"y", a.y}, {"radius", a.radius}});
    return nlohmann::json{{"artcodes", std::move(arr)}};
}

inline void write_annotations(const std::vector<CircleAnnotation>& anns, const std::string& path,
                              nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json doc = annotations_to_json(anns);
    for (auto& [k, v] : extra.items()) doc[k] = v;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace visionguide
