#include <doctest.h>

#include <cmath>

#include "ssf/errors.hpp"
#include "ssf/io.hpp"
#include "support/oracles.hpp"

using namespace ssf;

TEST_CASE("sha256 of the empty string and abc") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("jsonl skips the provenance header and blank lines") {
    auto dir = oracle::temp_dir("io_jsonl");
    auto p = dir / "rows.jsonl";
    write_jsonl(p, {json{{"a", 1}}, json{{"a", 2}}}, json{{"config_hash", "x"}});
    CHECK(read_text(p).rfind("{\"_provenance\"", 0) == 0);
    auto rows = read_jsonl(p);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1]["a"] == 2);

    write_text(p, "{\"a\":1}\n\n{broken\n");
    CHECK_THROWS_AS(read_jsonl(p), ValidationError);
}

TEST_CASE("csv round trip with quoting and comments") {
    auto dir = oracle::temp_dir("io_csv");
    CsvTable t{{"name", "note"}, {{"a,b", "say \"hi\""}, {"line\nbreak", ""}}};
    write_csv(dir / "t.csv", t, {"config_hash=abc"});
    CHECK(read_text(dir / "t.csv").rfind("# config_hash=abc\n", 0) == 0);
    auto back = read_csv(dir / "t.csv");
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
    CHECK(back.column("note") == 1);
    CHECK_FALSE(back.column("missing"));

    write_text(dir / "bad.csv", "a,b\n1\n");
    CHECK_THROWS_AS(read_csv(dir / "bad.csv"), ValidationError);
}

TEST_CASE("format_number is fixed precision") {
    CHECK(format_number(0.5) == "0.500000");
    CHECK(format_number(-1e-9) == "0.000000");
    CHECK(format_number(std::nan("")) == "NA");
    CHECK(format_number(2.0 / 3.0, 3) == "0.667");
}

TEST_CASE("rng is reproducible and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        auto x = a.index(7);
        CHECK(x == b.index(7));
        CHECK(x < 7);
        double u = a.unit();
        CHECK(u == b.unit());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK_THROWS(a.index(0));
    CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
    CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
    CHECK(derive_seed(1, "x") != derive_seed(2, "x"));
}
