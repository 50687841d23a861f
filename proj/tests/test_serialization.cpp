#include "ovnet/serialization.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ovnet/datasets.hpp"
#include "ovnet/random.hpp"
#include "ovnet/synthesis.hpp"

using namespace ovnet;

namespace {

class TempDir {
public:
    TempDir() {
        base_ = std::filesystem::temp_directory_path() /
                ("ovnet_ser_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    std::string path(const std::string& name) const { return (base_ / name).string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path base_;
};

FeedForwardNet cube_net() {
    SynthesisInput in;
    in.planes = canonical_planes(3, 1);
    in.clusters = nested_cube_clusters(3, 1, 0.3);
    in.class_count = 4;
    return synthesize_three_layer(in, SecondLayerKind::tanh);
}

}  // namespace

TEST(Serialization, FormatDoubleRoundTrips) {
    const std::vector<double> values = {
        0.0,
        -0.0,
        1.0,
        0.1,
        1.0 / 3.0,
        -2.5e-7,
        1e300,
        5e-324,  // smallest subnormal
        0.1 + 0.2,
        std::numeric_limits<double>::max(),
    };
    for (double v : values) {
        std::string s = format_double(v);
        double back = parse_double(s, "round trip");
        EXPECT_EQ(std::signbit(back), std::signbit(v));
        EXPECT_EQ(back, v);
    }
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Serialization, ParseFunctionsRejectTrailingGarbage) {
    EXPECT_DOUBLE_EQ(parse_double("-1.25e3", "x"), -1250.0);
    EXPECT_THROW(parse_double("1.0x", "x"), ValidationError);
    EXPECT_THROW(parse_double("", "x"), ValidationError);
    EXPECT_EQ(parse_int("-42", "x"), -42);
    EXPECT_THROW(parse_int("12.5", "x"), ValidationError);
    EXPECT_THROW(parse_int("four", "x"), ValidationError);
}

TEST(Serialization, Fnv1aKnownVectors) {
    // Standard 64-bit FNV-1a reference values.
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
    // The plane-set hash starts from the same offset basis.
    EXPECT_EQ(hash_hex(plane_set_hash({})), "cbf29ce484222325");
}

TEST(Serialization, PlanesRoundTripBitExact) {
    Rng rng(55);
    std::vector<Hyperplane> planes;
    for (int i = 0; i < 8; ++i) {
        Hyperplane p;
        p.bias = rng.uniform(-5.0, 5.0);
        for (int d = 0; d < 3; ++d) p.normal.push_back(rng.normal());
        planes.push_back(p);
    }
    planes.push_back({-0.0, {1e-300, -0.0, 4.0}});
    json j = planes_to_json(planes);
    std::string text = j.dump();
    std::vector<Hyperplane> back = planes_from_json(json::parse(text), "planes");
    ASSERT_EQ(back.size(), planes.size());
    EXPECT_EQ(plane_set_hash(back), plane_set_hash(planes));  // every bit survived
}

TEST(Serialization, PlanesValidation) {
    EXPECT_THROW(planes_from_json(json::parse("{}"), "p"), ValidationError);
    EXPECT_THROW(planes_from_json(json::parse(R"([{"bias": 1.0}])"), "p"), ValidationError);
    EXPECT_THROW(planes_from_json(json::parse(R"([{"bias": 1.0, "normal": []}])"), "p"),
                 ValidationError);
    EXPECT_THROW(planes_from_json(json::parse(R"([{"bias": "x", "normal": [1.0]}])"), "p"),
                 ValidationError);
}

TEST(Serialization, ClustersRoundTrip) {
    std::vector<ClusterSummary> clusters = nested_cube_clusters(3, 2, 0.7);
    json j = clusters_to_json(clusters);
    std::vector<ClusterSummary> back = clusters_from_json(j, "clusters");
    ASSERT_EQ(back.size(), clusters.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        EXPECT_EQ(back[i].id, clusters[i].id);
        EXPECT_EQ(back[i].class_label, clusters[i].class_label);
        EXPECT_EQ(back[i].centroid, clusters[i].centroid);
        EXPECT_DOUBLE_EQ(back[i].radius, clusters[i].radius);
    }
    EXPECT_THROW(clusters_from_json(json::array(), "c"), ValidationError);
    EXPECT_THROW(clusters_from_json(json::parse(R"([{"id": 0}])"), "c"), ValidationError);
    EXPECT_THROW(
        clusters_from_json(
            json::parse(R"([{"id": 0.5, "centroid": [1.0], "radius": 0.1, "class_label": 0}])"),
            "c"),
        ValidationError);
}

TEST(Serialization, ModelRoundTripPreservesBehavior) {
    FeedForwardNet net = cube_net();
    json j = net_to_json(net);
    FeedForwardNet back = net_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.input_dim, net.input_dim);
    ASSERT_EQ(back.layers.size(), net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        EXPECT_EQ(back.layers[l].weights, net.layers[l].weights);  // bit-exact
        EXPECT_EQ(back.layers[l].bias, net.layers[l].bias);
        EXPECT_EQ(back.layers[l].activation.kind, net.layers[l].activation.kind);
        EXPECT_DOUBLE_EQ(back.layers[l].activation.beta, net.layers[l].activation.beta);
    }
    NestedCubeSpec spec{3, 1, 0.3, 4, 2, 6};
    DatasetPair data = generate_level_r(spec);
    for (const auto& s : data.test.samples) {
        EXPECT_EQ(forward(back, s.point), forward(net, s.point));
    }
}

TEST(Serialization, ModelDefaultsAndValidation) {
    // Activation omitted -> identity; beta omitted -> 1.0.
    json j = json::parse(R"({
        "input_dim": 2,
        "layers": [
            {"weights": [[1.0, 0.0]], "bias": [0.0]},
            {"weights": [[2.0]], "bias": [0.5], "activation": {"kind": "tanh_beta"}}
        ]
    })");
    FeedForwardNet net = net_from_json(j);
    EXPECT_EQ(net.layers[0].activation.kind, ActivationKind::identity);
    EXPECT_EQ(net.layers[1].activation.kind, ActivationKind::tanh_beta);
    EXPECT_DOUBLE_EQ(net.layers[1].activation.beta, 1.0);

    EXPECT_THROW(net_from_json(json::parse(R"({"layers": []})")), ValidationError);
    EXPECT_THROW(net_from_json(json::parse(R"({"input_dim": 0, "layers": [1]})")),
                 ValidationError);
    EXPECT_THROW(net_from_json(json::parse(
                     R"({"input_dim": 2, "layers": [{"weights": [[1.0]], "bias": [0.0]}]})")),
                 ValidationError);  // row width 1 != input_dim 2
    EXPECT_THROW(net_from_json(json::parse(
                     R"({"input_dim": 1, "layers": [{"weights": [[1.0]], "bias": [0.0, 1.0]}]})")),
                 ValidationError);
    EXPECT_THROW(
        net_from_json(json::parse(
            R"({"input_dim": 1, "layers": [{"weights": [[1.0]], "bias": [0.0],
                 "activation": {"kind": "softmax"}}]})")),
        ValidationError);
    EXPECT_THROW(
        net_from_json(json::parse(
            R"({"input_dim": 1, "layers": [{"weights": [[1.0]], "bias": [0.0],
                 "activation": {"kind": "tanh_beta", "beta": 0.0}}]})")),
        ValidationError);
}

TEST(Serialization, DatasetCsvRoundTrip) {
    TempDir tmp;
    NestedCubeSpec spec{3, 1, 0.3, 4, 0, 22};
    DatasetPair data = generate_level_r(spec);
    const std::string path = tmp.path("train.csv");
    save_dataset_csv(data.train, path);
    LabeledDataset back = load_dataset_csv(path);
    EXPECT_EQ(back.dim, 3u);
    ASSERT_EQ(back.samples.size(), data.train.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
        EXPECT_EQ(back.samples[i].point, data.train.samples[i].point);  // bit-exact
        EXPECT_EQ(back.samples[i].cluster_id, data.train.samples[i].cluster_id);
        EXPECT_EQ(back.samples[i].class_label, data.train.samples[i].class_label);
    }
    std::string text = read_text_file(path);
    EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,x3,cluster_id,class_id");
}

TEST(Serialization, DatasetCsvValidation) {
    TempDir tmp;
    const std::string path = tmp.path("bad.csv");

    write_text_file(path, "x1,x2,foo,class_id\n");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);

    write_text_file(path, "x1,cluster_id,class_id\n1.0,0\n");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);  // too few fields

    write_text_file(path, "x1,cluster_id,class_id\n1.0,0,1,9\n");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);  // too many fields

    write_text_file(path, "x1,cluster_id,class_id\nabc,0,1\n");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);

    write_text_file(path, "x1,cluster_id,class_id\n1.0,0.5,1\n");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);  // non-integer id

    write_text_file(path, "");
    EXPECT_THROW(load_dataset_csv(path), ValidationError);

    EXPECT_THROW(load_dataset_csv(tmp.path("missing.csv")), ValidationError);
}

TEST(Serialization, ReportsSerializeWithStableFields) {
    std::vector<Hyperplane> planes = canonical_planes(3, 1);
    std::vector<ClusterSummary> clusters = nested_cube_clusters(3, 1, 0.3);
    SeparationReport rep = verify_separation(planes, clusters);
    json sj = separation_report_to_json(rep);
    EXPECT_TRUE(sj["separated"].get<bool>());
    EXPECT_EQ(sj["codes"].size(), 8u);
    EXPECT_EQ(sj["plane_set_hash"].get<std::string>(), hash_hex(plane_set_hash(planes)));
    EXPECT_EQ(sj["codes"]["0"].size(), 3u);

    PlannerTrace trace;
    trace.steps.push_back({5, PlannerAction::added_plane, 2, 1, 4, 2});
    trace.success = true;
    json tj = planner_trace_to_json(trace);
    EXPECT_EQ(tj["steps"][0]["action"].get<std::string>(), "added_plane");
    EXPECT_EQ(tj["steps"][0]["cluster_id"].get<int>(), 5);
    EXPECT_TRUE(tj["success"].get<bool>());
    EXPECT_EQ(tj["failure"].get<std::string>(), "");

    TrainReport report;
    report.final_train_accuracy = 0.75;
    report.final_test_accuracy = 0.5;
    report.epoch_losses = {1.0, 0.5};
    report.epochs_run = 2;
    json rj = train_report_to_json(report);
    EXPECT_DOUBLE_EQ(rj["final_train_accuracy"].get<double>(), 0.75);
    EXPECT_EQ(rj["epoch_losses"].size(), 2u);
    EXPECT_EQ(rj["epochs_run"].get<std::size_t>(), 2u);
}
