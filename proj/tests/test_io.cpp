#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "qeml/io.hpp"

using namespace qeml;
namespace fs = std::filesystem;

namespace {

std::string error_text(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(MatrixJson, RoundTripExact) {
    const ComplexMatrix m = haar_unitary(3, Seed{4});
    EXPECT_EQ(io::matrix_from_json(io::to_json(m)), m);
    const io::Json reparsed = io::parse(io::dump(io::to_json(m)));
    EXPECT_EQ(io::matrix_from_json(reparsed), m);
}

TEST(MatrixJson, RaggedRowNamesPointer) {
    const io::Json j = io::parse(R"([[[1,0],[0,0]],[[0,0]]])");
    const std::string msg = error_text([&] { io::matrix_from_json(j, "/m"); });
    EXPECT_NE(msg.find("/m/1"), std::string::npos) << msg;
}

TEST(ChannelJson, RoundTripThroughFile) {
    const Channel t = random_channel(4, 3, Seed{7});
    const fs::path path = fs::temp_directory_path() / "qeml_io_channel.json";
    io::write_file(path.string(), io::dump(io::to_json(t)));
    const Channel back = io::channel_from_json(io::parse(io::read_file(path.string()), path.string()));
    fs::remove(path);
    ASSERT_EQ(back.degree(), 3);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(back.unitaries()[k], t.unitaries()[k]);
    EXPECT_EQ(reduced_spectral_radius(back), reduced_spectral_radius(t));
}

TEST(ChannelJson, CorruptedUnitaryReportedByIndex) {
    io::Json j = io::to_json(random_channel(3, 3, Seed{2}));
    j["unitaries"][2][0][0][0] = 5.0;
    const std::string msg = error_text([&] { io::channel_from_json(j); });
    EXPECT_NE(msg.find("unitary 2"), std::string::npos) << msg;
    EXPECT_THROW(io::channel_from_json(j), ValidationError);
}

TEST(ChannelJson, SchemaErrors) {
    io::Json j = io::to_json(random_channel(2, 2, Seed{1}));
    j["degree"] = 3;
    EXPECT_THROW(io::channel_from_json(j), ParseError);
    io::Json k = io::to_json(random_channel(2, 2, Seed{1}));
    k.erase("dim");
    EXPECT_NE(error_text([&] { io::channel_from_json(k); }).find("'dim'"), std::string::npos);
    io::Json s = io::to_json(random_channel(2, 2, Seed{1}));
    s["dim"] = 3;
    EXPECT_NE(error_text([&] { io::channel_from_json(s); }).find("/unitaries/0"), std::string::npos);
}

TEST(Parse, SyntaxErrorHasLineAndColumn) {
    const std::string msg = error_text([] { io::parse("{\n  \"dim\": 2,\n  oops\n}", "f.json"); });
    EXPECT_EQ(msg.rfind("f.json:3:", 0), 0u) << msg;
    EXPECT_THROW(io::parse("[1, 2", "x"), ParseError);
}

TEST(Files, MissingFileIsIoError) {
    EXPECT_THROW(io::read_file("/nonexistent/qeml.json"), IoError);
    EXPECT_THROW(io::write_file("/nonexistent/dir/out.json", "{}"), IoError);
}

TEST(GraphJson, RoundTrip) {
    const RegularGraph g = random_regular_graph(8, 3, Seed{5});
    const io::Json j = io::to_json(g);
    EXPECT_TRUE(io::is_graph_document(j));
    EXPECT_FALSE(io::is_graph_document(io::to_json(random_channel(2, 2, Seed{1}))));
    const RegularGraph back = io::graph_from_json(io::parse(io::dump(j)));
    EXPECT_EQ(back.adjacency(), g.adjacency());
}

TEST(GraphJson, RejectsBadEdgesAndDegree) {
    EXPECT_THROW(io::graph_from_json(io::parse(R"({"n":4,"edges":[[0,1],[1,2],[2,3],[3,0],[0,0]]})")),
                 ValidationError);
    EXPECT_THROW(io::graph_from_json(io::parse(R"({"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]],"degree":3})")),
                 ParseError);
    EXPECT_THROW(io::graph_from_json(io::parse(R"({"n":4,"edges":[[0,1,2]]})")), ParseError);
}

TEST(ReportJson, WitnessFields) {
    const WitnessReport r = mixing_witnesses(cyclic_cayley_channel(5, std::vector<int>{1, 4}));
    const io::Json j = io::to_json(r, true);
    for (const char* key : {"dim", "degree", "rho", "K", "tr_p1", "tr_p2", "inner", "baseline", "discrepancy", "ratio",
                            "guaranteed", "pass", "C_eff", "P1", "P2"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(io::matrix_from_json(j["P2"]), r.p2.matrix());
    EXPECT_FALSE(io::to_json(r).contains("P1"));
}

TEST(ReportJson, SuiteFailureCarriesInstance) {
    SuiteTolerances tol;
    tol.identity = -10.0;
    const io::Json j = io::to_json(inequality_suite(Seed{3}, 1, tol));
    ASSERT_TRUE(j.is_array());
    bool saw = false;
    for (const auto& row : j) {
        if (row["check"] == "holder") {
            saw = true;
            EXPECT_FALSE(row["pass"].get<bool>());
            ASSERT_TRUE(row.contains("instance"));
            EXPECT_NO_THROW(io::channel_from_json(row["instance"]));
        }
    }
    EXPECT_TRUE(saw);
}
