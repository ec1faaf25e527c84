#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <bcd/errors.hpp>
#include <bcd/objectives.hpp>

namespace bcd {

using json = nlohmann::json;

// Instance file: a JSON object with the generator parameters and the data,
// A stored row-major as a list of rows.
inline json instance_to_json(const GeneratedInstance& inst)
{
    json A = json::array();
    for (Index i = 0; i < inst.A.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < inst.A.cols(); ++j) row.push_back(inst.A(i, j));
        A.push_back(std::move(row));
    }
    const auto vec = [](const Vector& v) {
        json out = json::array();
        for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
        return out;
    };
    return json{{"format", "bcd-instance"},
                {"version", 1},
                {"m", inst.m},
                {"n", inst.n},
                {"seed", inst.seed},
                {"lambda", inst.lambda},
                {"y_normalization", "unit_norm"},
                {"A", std::move(A)},
                {"b", vec(inst.b)},
                {"c", vec(inst.c)},
                {"y", vec(inst.y)}};
}

inline GeneratedInstance instance_from_json(const json& j)
{
    try {
        if (j.at("format").get<std::string>() != "bcd-instance") throw ConfigError("not an instance file");
        GeneratedInstance inst;
        inst.m = j.at("m").get<Index>();
        inst.n = j.at("n").get<Index>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.lambda = j.at("lambda").get<double>();
        const auto& A = j.at("A");
        if (static_cast<Index>(A.size()) != inst.m) throw ConfigError("instance: A has the wrong row count");
        inst.A.resize(inst.m, inst.n);
        for (Index i = 0; i < inst.m; ++i) {
            const auto& row = A.at(static_cast<std::size_t>(i));
            if (static_cast<Index>(row.size()) != inst.n) throw ConfigError("instance: ragged row in A");
            for (Index k = 0; k < inst.n; ++k) inst.A(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
        }
        const auto vec = [](const json& a, Index len, const char* what) {
            if (static_cast<Index>(a.size()) != len) throw ConfigError(std::string("instance: wrong length for ") + what);
            Vector v(len);
            for (Index i = 0; i < len; ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
            return v;
        };
        inst.b = vec(j.at("b"), inst.m, "b");
        inst.c = vec(j.at("c"), inst.n, "c");
        inst.y = j.contains("y") ? vec(j.at("y"), inst.n, "y") : Vector::Zero(inst.n);
        return inst;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline void save_instance(const std::string& path, const GeneratedInstance& inst)
{
    write_file(path, instance_to_json(inst).dump(1) + "\n");
}

inline GeneratedInstance load_instance(const std::string& path)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return instance_from_json(j);
}

} // namespace bcd
