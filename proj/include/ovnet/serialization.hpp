#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ovnet/datasets.hpp"
#include "ovnet/geometry.hpp"
#include "ovnet/network.hpp"
#include "ovnet/orientation.hpp"
#include "ovnet/planner.hpp"
#include "ovnet/trainer.hpp"

namespace ovnet {

/// Malformed input: unreadable file, bad schema, out-of-range field.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Text files and number formatting
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file for reading: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open file for writing: " + path);
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError(context + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view text, const std::string& context) {
    long long v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ValidationError(context + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

/// FNV-1a 64-bit over a byte string, as 16 hex digits. Stamps configs and
/// plane sets for provenance.
inline std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

// ---------------------------------------------------------------------------
// Planes and clusters
// ---------------------------------------------------------------------------

inline json plane_to_json(const Hyperplane& p) {
    return json{{"bias", p.bias}, {"normal", p.normal}};
}

inline Hyperplane plane_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("bias") || !j.contains("normal")) {
        throw ValidationError(context + ": plane needs 'bias' and 'normal'");
    }
    if (!j["bias"].is_number()) {
        throw ValidationError(context + ": 'bias' must be a number");
    }
    if (!j["normal"].is_array() || j["normal"].empty()) {
        throw ValidationError(context + ": 'normal' must be a nonempty array");
    }
    Hyperplane p;
    p.bias = j["bias"].get<double>();
    for (const auto& c : j["normal"]) {
        if (!c.is_number()) {
            throw ValidationError(context + ": 'normal' entries must be numbers");
        }
        p.normal.push_back(c.get<double>());
    }
    return p;
}

inline json planes_to_json(const std::vector<Hyperplane>& planes) {
    json arr = json::array();
    for (const auto& p : planes) arr.push_back(plane_to_json(p));
    return arr;
}

inline std::vector<Hyperplane> planes_from_json(const json& j, const std::string& context) {
    if (!j.is_array()) {
        throw ValidationError(context + ": expected an array of planes");
    }
    std::vector<Hyperplane> planes;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::ostringstream ctx;
        ctx << context << "[" << i << "]";
        planes.push_back(plane_from_json(j[i], ctx.str()));
    }
    return planes;
}

inline json cluster_to_json(const ClusterSummary& c) {
    return json{{"id", c.id},
                {"centroid", c.centroid},
                {"radius", c.radius},
                {"class_label", c.class_label}};
}

inline ClusterSummary cluster_from_json(const json& j, const std::string& context) {
    for (const char* key : {"id", "centroid", "radius", "class_label"}) {
        if (!j.contains(key)) {
            throw ValidationError(context + ": cluster needs '" + key + "'");
        }
    }
    if (!j["id"].is_number_integer() || !j["class_label"].is_number_integer()) {
        throw ValidationError(context + ": 'id' and 'class_label' must be integers");
    }
    if (!j["radius"].is_number()) {
        throw ValidationError(context + ": 'radius' must be a number");
    }
    if (!j["centroid"].is_array() || j["centroid"].empty()) {
        throw ValidationError(context + ": 'centroid' must be a nonempty array");
    }
    ClusterSummary c;
    c.id = j["id"].get<int>();
    c.class_label = j["class_label"].get<int>();
    c.radius = j["radius"].get<double>();
    for (const auto& x : j["centroid"]) {
        if (!x.is_number()) {
            throw ValidationError(context + ": 'centroid' entries must be numbers");
        }
        c.centroid.push_back(x.get<double>());
    }
    return c;
}

inline json clusters_to_json(const std::vector<ClusterSummary>& clusters) {
    json arr = json::array();
    for (const auto& c : clusters) arr.push_back(cluster_to_json(c));
    return arr;
}

inline std::vector<ClusterSummary> clusters_from_json(const json& j,
                                                      const std::string& context) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError(context + ": expected a nonempty array of clusters");
    }
    std::vector<ClusterSummary> clusters;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::ostringstream ctx;
        ctx << context << "[" << i << "]";
        clusters.push_back(cluster_from_json(j[i], ctx.str()));
    }
    return clusters;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline std::string activation_kind_name(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::tanh_beta: return "tanh_beta";
        case ActivationKind::unit_step: return "unit_step";
        case ActivationKind::identity: return "identity";
    }
    throw std::logic_error("activation_kind_name: unknown kind");
}

inline ActivationKind activation_kind_from_name(const std::string& name,
                                                const std::string& context) {
    if (name == "tanh_beta") return ActivationKind::tanh_beta;
    if (name == "unit_step") return ActivationKind::unit_step;
    if (name == "identity") return ActivationKind::identity;
    throw ValidationError(context + ": unknown activation kind '" + name + "'");
}

inline json net_to_json(const FeedForwardNet& net) {
    json layers = json::array();
    for (const auto& layer : net.layers) {
        json rows = json::array();
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < layer.in_dim; ++c) {
                row.push_back(layer.weight_at(r, c));
            }
            rows.push_back(std::move(row));
        }
        layers.push_back(json{{"weights", std::move(rows)},
                              {"bias", layer.bias},
                              {"activation",
                               json{{"kind", activation_kind_name(layer.activation.kind)},
                                    {"beta", layer.activation.beta}}}});
    }
    return json{{"input_dim", net.input_dim}, {"layers", std::move(layers)}};
}

inline FeedForwardNet net_from_json(const json& j) {
    if (!j.is_object() || !j.contains("input_dim") || !j.contains("layers")) {
        throw ValidationError("model: needs 'input_dim' and 'layers'");
    }
    if (!j["input_dim"].is_number_integer() || j["input_dim"].get<long long>() < 1) {
        throw ValidationError("model: 'input_dim' must be a positive integer");
    }
    if (!j["layers"].is_array() || j["layers"].empty()) {
        throw ValidationError("model: 'layers' must be a nonempty array");
    }
    FeedForwardNet net;
    net.input_dim = j["input_dim"].get<std::size_t>();
    std::size_t expected_in = net.input_dim;
    for (std::size_t li = 0; li < j["layers"].size(); ++li) {
        std::ostringstream ctx;
        ctx << "model layer " << li;
        const json& lj = j["layers"][li];
        if (!lj.is_object() || !lj.contains("weights") || !lj.contains("bias")) {
            throw ValidationError(ctx.str() + ": needs 'weights' and 'bias'");
        }
        const json& rows = lj["weights"];
        const json& bias = lj["bias"];
        if (!rows.is_array() || rows.empty() || !bias.is_array() ||
            bias.size() != rows.size()) {
            throw ValidationError(ctx.str() +
                                  ": 'weights' rows and 'bias' must be equal-length arrays");
        }
        DenseLayer layer;
        layer.out_dim = rows.size();
        layer.in_dim = expected_in;
        layer.weights.reserve(layer.in_dim * layer.out_dim);
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != expected_in) {
                std::ostringstream msg;
                msg << ctx.str() << ": every weight row must have " << expected_in
                    << " entries";
                throw ValidationError(msg.str());
            }
            for (const auto& w : row) {
                if (!w.is_number()) {
                    throw ValidationError(ctx.str() + ": weights must be numbers");
                }
                layer.weights.push_back(w.get<double>());
            }
        }
        for (const auto& b : bias) {
            if (!b.is_number()) {
                throw ValidationError(ctx.str() + ": biases must be numbers");
            }
            layer.bias.push_back(b.get<double>());
        }
        layer.activation = {ActivationKind::identity, 1.0};
        if (lj.contains("activation")) {
            const json& aj = lj["activation"];
            if (!aj.is_object() || !aj.contains("kind") || !aj["kind"].is_string()) {
                throw ValidationError(ctx.str() + ": 'activation' needs a string 'kind'");
            }
            layer.activation.kind =
                activation_kind_from_name(aj["kind"].get<std::string>(), ctx.str());
            if (aj.contains("beta")) {
                if (!aj["beta"].is_number()) {
                    throw ValidationError(ctx.str() + ": 'beta' must be a number");
                }
                layer.activation.beta = aj["beta"].get<double>();
            }
            if (layer.activation.kind == ActivationKind::tanh_beta &&
                !(layer.activation.beta > 0.0)) {
                throw ValidationError(ctx.str() + ": 'beta' must be > 0 for tanh");
            }
        }
        expected_in = layer.out_dim;
        net.layers.push_back(std::move(layer));
    }
    check_shape(net);
    return net;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json orientation_code_to_json(const OrientationCode& code) {
    json arr = json::array();
    for (std::int8_t s : code.signs) arr.push_back(static_cast<int>(s));
    return arr;
}

inline json separation_report_to_json(const SeparationReport& report) {
    json codes = json::object();
    for (const auto& [id, code] : report.codes) {
        codes[std::to_string(id)] = orientation_code_to_json(code);
    }
    json duplicates = json::array();
    for (const auto& group : report.duplicate_groups) duplicates.push_back(group);
    json cuts = json::array();
    for (const auto& cut : report.cut_clusters) {
        cuts.push_back(json{{"cluster_id", cut.cluster_id},
                            {"plane_index", cut.plane_index},
                            {"clearance", cut.clearance}});
    }
    return json{{"plane_set_hash", hash_hex(report.plane_set_hash)},
                {"codes", std::move(codes)},
                {"duplicate_groups", std::move(duplicates)},
                {"cut_clusters", std::move(cuts)},
                {"separated", report.separated()}};
}

inline const char* planner_action_name(PlannerAction action) {
    switch (action) {
        case PlannerAction::accepted_fresh_code: return "accepted_fresh_code";
        case PlannerAction::refit_open_plane: return "refit_open_plane";
        case PlannerAction::added_plane: return "added_plane";
    }
    throw std::logic_error("planner_action_name: unknown action");
}

inline json planner_trace_to_json(const PlannerTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        steps.push_back(json{{"cluster_id", s.cluster_id},
                             {"action", planner_action_name(s.action)},
                             {"conflict_partner", s.conflict_partner},
                             {"plane_index", s.plane_index},
                             {"code_table_size", s.code_table_size},
                             {"plane_count", s.plane_count}});
    }
    return json{{"steps", std::move(steps)},
                {"initial_plane_count", trace.initial_plane_count},
                {"estimated_planes", trace.estimated_planes},
                {"seed", trace.seed},
                {"success", trace.success},
                {"failure", trace.failure}};
}

inline json train_report_to_json(const TrainReport& report) {
    return json{{"final_train_accuracy", report.final_train_accuracy},
                {"final_test_accuracy", report.final_test_accuracy},
                {"epochs_run", report.epochs_run},
                {"epoch_losses", report.epoch_losses}};
}

// ---------------------------------------------------------------------------
// Dataset CSV
// ---------------------------------------------------------------------------

/// Header `x1,...,xn,cluster_id,class_id`, one sample per row, doubles at
/// full round-trip precision. Cluster summaries are NOT carried by the CSV;
/// store them in a clusters JSON next to it.
inline void save_dataset_csv(const LabeledDataset& data, const std::string& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < data.dim; ++i) out << 'x' << (i + 1) << ',';
    out << "cluster_id,class_id\n";
    for (const auto& s : data.samples) {
        if (s.point.size() != data.dim) {
            throw std::invalid_argument("save_dataset_csv: sample dimension mismatch");
        }
        for (double v : s.point) out << format_double(v) << ',';
        out << s.cluster_id << ',' << s.class_label << '\n';
    }
    write_text_file(path, out.str());
}

inline LabeledDataset load_dataset_csv(const std::string& path) {
    std::string text = read_text_file(path);
    LabeledDataset data;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        line = std::string_view(text).substr(pos, end - pos);
        pos = end + 1;
        return true;
    };
    std::string_view header;
    if (!next_line(header) || header.empty()) {
        throw ValidationError(path + ": missing CSV header");
    }
    std::vector<std::string_view> cols;
    {
        std::size_t start = 0;
        std::string_view h = header;
        while (true) {
            std::size_t comma = h.find(',', start);
            if (comma == std::string_view::npos) {
                cols.push_back(h.substr(start));
                break;
            }
            cols.push_back(h.substr(start, comma - start));
            start = comma + 1;
        }
    }
    if (cols.size() < 3 || cols[cols.size() - 2] != "cluster_id" ||
        cols[cols.size() - 1] != "class_id") {
        throw ValidationError(path + ": header must be x1,...,xn,cluster_id,class_id");
    }
    data.dim = cols.size() - 2;
    std::string_view line;
    std::size_t row = 1;
    while (next_line(line)) {
        ++row;
        if (line.empty()) continue;
        std::ostringstream ctx;
        ctx << path << " row " << row;
        std::size_t fields_in_line = 1;
        for (char ch : line) {
            if (ch == ',') ++fields_in_line;
        }
        if (fields_in_line != cols.size()) {
            throw ValidationError(ctx.str() + ": wrong number of fields");
        }
        Sample s;
        s.point.reserve(data.dim);
        std::size_t start = 0;
        for (std::size_t field = 0; field < cols.size(); ++field) {
            std::size_t comma = line.find(',', start);
            std::string_view cell = comma == std::string_view::npos
                                        ? line.substr(start)
                                        : line.substr(start, comma - start);
            if (field < data.dim) {
                s.point.push_back(parse_double(cell, ctx.str()));
            } else if (field == data.dim) {
                s.cluster_id = static_cast<int>(parse_int(cell, ctx.str()));
            } else {
                s.class_label = static_cast<int>(parse_int(cell, ctx.str()));
            }
            start = comma + 1;
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

}  // namespace ovnet
