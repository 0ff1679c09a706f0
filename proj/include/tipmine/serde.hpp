#pragma once

// JSON Lines plumbing and model-file persistence helpers. Model files are
// written with ordered keys and round-trip-exact doubles so that
// write -> read -> write is byte-identical.

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tipmine/error.hpp"

namespace tipmine {

using OrderedJson = nlohmann::ordered_json;

// Calls fn(record, line_no) for every non-empty line; malformed JSON is fatal
// with the line number.
inline void read_jsonl(const std::string& path,
                       const std::function<void(const nlohmann::json&,
                                                std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": invalid record");
        fn(j, line_no);
    }
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : out_(path) {
        if (!out_) throw DataError("cannot write file: " + path);
        path_ = path;
    }

    void write(const OrderedJson& j) {
        out_ << j.dump() << '\n';
        if (!out_) throw DataError("write failed: " + path_);
    }

    void close() {
        out_.close();
        if (out_.fail()) throw DataError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

inline void write_model_file(const std::string& path, const OrderedJson& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

// Reads a model file and checks its self-describing header.
inline OrderedJson read_model_file(const std::string& path,
                                   const std::string& kind,
                                   int expected_version) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    OrderedJson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(path + ": invalid model file: " + e.what());
    }
    if (!j.is_object() || j.value("kind", std::string()) != kind)
        throw DataError(path + ": not a " + kind + " model file");
    if (j.value("version", -1) != expected_version)
        throw DataError(path + ": unsupported " + kind + " model version");
    return j;
}

inline OrderedJson to_json_vector(const std::vector<double>& v) {
    return OrderedJson(v);
}

inline std::vector<double> doubles_from_json(const nlohmann::json& j,
                                             const char* what) {
    if (!j.is_array()) throw DataError(std::string("expected array: ") + what);
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number())
            throw DataError(std::string("expected number in ") + what);
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace tipmine
