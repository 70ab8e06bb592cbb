#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "qmetric/io.hpp"
#include "qmetric/random.hpp"

using namespace qmetric;

TEST_CASE("format_double emits shortest round-trip decimals") {
    REQUIRE(format_double(2.0) == "2.0");
    REQUIRE(format_double(0.0) == "0.0");
    REQUIRE(format_double(8.0 / 3.0) == "2.6666666666666665");
    REQUIRE(format_double(-1.5e-12) == "-1.5e-12");
    REQUIRE(format_double(0.1) == "0.1");
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
        REQUIRE(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("matrix documents round-trip bit-exactly") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const int rows = 1 + int(rng.uniform_int(5));
        const int cols = 1 + int(rng.uniform_int(5));
        const Matrix M = random_complex_matrix(rows, cols, rng);
        const Matrix back = matrix_from_json(matrix_to_json(M));
        REQUIRE(back.rows() == M.rows());
        REQUIRE(back.cols() == M.cols());
        REQUIRE(back == M);  // bit-exact, not approximate
    }
    const json tagged = matrix_to_json(Matrix::Identity(2, 2), "density");
    REQUIRE(tagged["tag"] == "density");
    REQUIRE(matrix_from_json(tagged) == Matrix(Matrix::Identity(2, 2)));
}

TEST_CASE("matrix documents reject malformed input") {
    json doc = matrix_to_json(Matrix::Identity(2, 2));
    json extra = doc;
    extra["comment"] = "hi";
    REQUIRE_THROWS_AS(matrix_from_json(extra), ParseError);

    json bad_tag = doc;
    bad_tag["tag"] = "unitary";
    REQUIRE_THROWS_AS(matrix_from_json(bad_tag), ParseError);

    json short_data = doc;
    short_data["data"].erase(0);
    REQUIRE_THROWS_AS(matrix_from_json(short_data), ParseError);

    json bad_cell = doc;
    bad_cell["data"][0] = {1.0};
    REQUIRE_THROWS_AS(matrix_from_json(bad_cell), ParseError);

    json nonfinite = doc;
    nonfinite["data"][0] = {std::numeric_limits<double>::infinity(), 0.0};
    REQUIRE_THROWS_AS(matrix_from_json(nonfinite), ParseError);

    json zero_dim = doc;
    zero_dim["rows"] = 0;
    REQUIRE_THROWS_AS(matrix_from_json(zero_dim), ParseError);

    REQUIRE_THROWS_AS(matrix_from_json(json::array()), ParseError);
}

TEST_CASE("channel documents round-trip and validate") {
    Rng rng(4);
    const KrausChannel T = random_cptni(3, 2, 3, 0.25, rng);
    const KrausChannel back = channel_from_json(channel_to_json(T));
    REQUIRE(back.kraus().size() == T.kraus().size());
    for (std::size_t k = 0; k < back.kraus().size(); ++k)
        REQUIRE(back.kraus()[k] == T.kraus()[k]);

    json doc = channel_to_json(T);
    doc["extra"] = 1;
    REQUIRE_THROWS_AS(channel_from_json(doc), ParseError);
    json empty;
    empty["kraus"] = json::array();
    REQUIRE_THROWS_AS(channel_from_json(empty), ParseError);
}

TEST_CASE("transpose pseudo-channel documents") {
    json tp;
    tp["map"] = "transpose";
    tp["dim"] = 3;
    REQUIRE(is_transpose_pseudo_channel(tp));
    REQUIRE(transpose_pseudo_channel_dim(tp) == 3);
    REQUIRE_FALSE(is_transpose_pseudo_channel(channel_to_json(
        KrausChannel({Matrix::Identity(2, 2)}))));

    json bad = tp;
    bad["map"] = "conjugate";
    REQUIRE_THROWS_AS(transpose_pseudo_channel_dim(bad), ParseError);
    json no_dim;
    no_dim["map"] = "transpose";
    REQUIRE_THROWS_AS(transpose_pseudo_channel_dim(no_dim), ParseError);
    json neg = tp;
    neg["dim"] = 0;
    REQUIRE_THROWS_AS(transpose_pseudo_channel_dim(neg), ParseError);
}

TEST_CASE("parse_matrix_spec shorthand") {
    const Matrix d = parse_matrix_spec("diag(0.5, 0.25)");
    REQUIRE(d.rows() == 2);
    REQUIRE(d(0, 0) == Complex(0.5, 0.0));
    REQUIRE(d(1, 1) == Complex(0.25, 0.0));
    REQUIRE(d(0, 1) == Complex(0.0, 0.0));

    const Matrix e = parse_matrix_spec("Eij(3,1,2)");
    REQUIRE(e.rows() == 3);
    REQUIRE(e(0, 1) == Complex(1.0, 0.0));
    REQUIRE(e.cwiseAbs().sum() == 1.0);

    REQUIRE_THROWS_AS(parse_matrix_spec("diag()"), ParseError);
    REQUIRE_THROWS_AS(parse_matrix_spec("diag(1,x)"), ParseError);
    REQUIRE_THROWS_AS(parse_matrix_spec("Eij(2,3,1)"), ParseError);
    REQUIRE_THROWS_AS(parse_matrix_spec("Eij(2,1)"), ParseError);
    REQUIRE_THROWS_AS(parse_matrix_spec("/no/such/file.json"), ParseError);
}

TEST_CASE("parse_matrix_spec reads matrix files") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "qmetric_io_test_matrix.json";
    Rng rng(5);
    const Matrix M = random_hermitian(3, rng);
    save_json_file(path.string(), matrix_to_json(M, "hermitian"));
    const Matrix back = parse_matrix_spec(path.string());
    REQUIRE(back == M);
    const json loaded = load_json_file(path.string());
    REQUIRE(loaded["tag"] == "hermitian");
    std::remove(path.string().c_str());
    REQUIRE_THROWS_AS(load_json_file(path.string()), ParseError);
}

TEST_CASE("fnv1a_hash matches published vectors") {
    REQUIRE(fnv1a_hash("") == 0xcbf29ce484222325ULL);
    REQUIRE(fnv1a_hash("a") == 0xaf63dc4c8601ec8cULL);
    REQUIRE(fnv1a_hash("foobar") == 0x85944171f73967e8ULL);
    REQUIRE(fnv1a_hash("x") != fnv1a_hash("y"));
}
