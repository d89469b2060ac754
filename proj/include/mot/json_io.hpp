#ifndef MOT_JSON_IO_HPP
#define MOT_JSON_IO_HPP

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mot/errors.hpp"
#include "mot/measure.hpp"
#include "mot/pwl.hpp"
#include "mot/scalar.hpp"

namespace mot {

using Json = nlohmann::ordered_json;

namespace detail {

template <class S>
S scalar_from_json(const Json& j) {
    if (j.is_string()) return scalar_from_string<S>(j.get<std::string>());
    if constexpr (scalar_traits<S>::exact) {
        if (j.is_number_integer()) return S(j.get<long long>());
        if (j.is_number_float())
            throw ConfigError(
                "exact mode requires integers or quoted literals like \"1/3\" or \"0.5\"");
        throw ConfigError("expected a number");
    } else {
        if (j.is_number()) return j.get<double>();
        throw ConfigError("expected a number");
    }
}

template <class S>
Json scalar_to_json(const S& x) {
    if constexpr (scalar_traits<S>::exact)
        return Json(scalar_to_string(x));
    else
        return Json(x);
}

}  // namespace detail

template <class S>
DiscreteMeasure<S> measure_from_json(const Json& j) {
    if (!j.contains("support") || !j.contains("weights"))
        throw ConfigError("measure JSON needs 'support' and 'weights' arrays");
    std::vector<S> xs, ws;
    for (const auto& v : j.at("support")) xs.push_back(detail::scalar_from_json<S>(v));
    for (const auto& v : j.at("weights")) ws.push_back(detail::scalar_from_json<S>(v));
    try {
        return DiscreteMeasure<S>(std::move(xs), std::move(ws));
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid measure: ") + e.what());
    }
}

template <class S>
Json measure_to_json(const DiscreteMeasure<S>& m) {
    Json j;
    j["support"] = Json::array();
    j["weights"] = Json::array();
    for (const S& x : m.support()) j["support"].push_back(detail::scalar_to_json(x));
    for (const S& w : m.weights()) j["weights"].push_back(detail::scalar_to_json(w));
    return j;
}

template <class S>
PiecewiseLinear<S> pwl_from_json(const Json& j) {
    if (!j.contains("breakpoints") || !j.contains("values"))
        throw ConfigError("function JSON needs 'breakpoints' and 'values' arrays");
    std::vector<S> xs, ys;
    for (const auto& v : j.at("breakpoints")) xs.push_back(detail::scalar_from_json<S>(v));
    for (const auto& v : j.at("values")) ys.push_back(detail::scalar_from_json<S>(v));

    auto slope = [&](const char* key, bool& unbounded) -> S {
        if (!j.contains(key)) return S(0);
        const Json& v = j.at(key);
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "inf" || s == "+inf" || s == "-inf") {
                unbounded = true;
                return S(0);
            }
        }
        return detail::scalar_from_json<S>(v);
    };
    bool unbounded_left = false, unbounded_right = false;
    S sl = slope("slopeLeft", unbounded_left);
    S sr = slope("slopeRight", unbounded_right);

    PiecewiseLinear<S> f = [&]() {
        try {
            if (!j.contains("slopeLeft") && !j.contains("slopeRight") && xs.size() > 1)
                return PiecewiseLinear<S>::interpolate(std::move(xs), std::move(ys));
            return PiecewiseLinear<S>(std::move(xs), std::move(ys), sl, sr);
        } catch (const Error& e) {
            throw ConfigError(std::string("invalid function: ") + e.what());
        }
    }();
    if (unbounded_left) f.mark_unbounded_left();
    if (unbounded_right) f.mark_unbounded_right();

    if (j.contains("jumps")) {
        const Json& jumps = j.at("jumps");
        if (jumps.contains("left"))
            f.set_jump(f.breakpoints().front(), detail::scalar_from_json<S>(jumps.at("left")));
        if (jumps.contains("right"))
            f.set_jump(f.breakpoints().back(), detail::scalar_from_json<S>(jumps.at("right")));
    }
    return f;
}

template <class S>
Json pwl_to_json(const PiecewiseLinear<S>& f) {
    Json j;
    j["breakpoints"] = Json::array();
    j["values"] = Json::array();
    for (const S& x : f.breakpoints()) j["breakpoints"].push_back(detail::scalar_to_json(x));
    for (const S& y : f.values()) j["values"].push_back(detail::scalar_to_json(y));
    j["slopeLeft"] = f.unbounded_left() ? Json("-inf") : detail::scalar_to_json(f.slope_left());
    j["slopeRight"] = f.unbounded_right() ? Json("inf") : detail::scalar_to_json(f.slope_right());
    if (f.has_jumps()) {
        Json jumps;
        if (f.jump_left()) jumps["left"] = detail::scalar_to_json(f.jump_left()->second);
        if (f.jump_right()) jumps["right"] = detail::scalar_to_json(f.jump_right()->second);
        j["jumps"] = jumps;
    }
    return j;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("cannot parse JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

}  // namespace mot

#endif
