#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "memmap/model_store.hpp"

using memmap::Matrix;
using memmap::ModelParams;
using memmap::Vector;

namespace {

ModelParams sample_model() {
    ModelParams m;
    m.n = 2;
    m.p = 1;
    m.M = 3;
    m.N = 4;
    m.a.resize(3, 2);
    m.a << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    m.alpha.resize(3, 1);
    m.alpha << 1.0 / 3.0, -2.5, 17.125;
    m.B.resize(3, 4);
    m.B.setConstant(0.125);
    m.B(1, 2) = -0.7;
    m.w = Vector::Constant(2, 1.5);
    m.sigma2 = 1.0;
    m.sigma_x2 = 0.01;
    m.nu = 5.0;
    return m;
}

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("model round trip") {
    const auto path = tmp_path("memmap_store_rt.mmj");
    auto m = sample_model();
    memmap::save_model(m, path, true);
    auto loaded = memmap::load_model(path);

    CHECK(loaded.n == m.n);
    CHECK(loaded.p == m.p);
    CHECK(loaded.M == m.M);
    CHECK(loaded.N == m.N);
    CHECK(loaded.nu == m.nu);
    CHECK((loaded.alpha - m.alpha).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((loaded.a - m.a).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((loaded.B - m.B).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((loaded.w - m.w).cwiseAbs().maxCoeff() <= 1e-15);

    SUBCASE("save -> load -> save is byte-identical") {
        const auto path2 = tmp_path("memmap_store_rt2.mmj");
        memmap::save_model(loaded, path2, true);
        CHECK(slurp(path) == slurp(path2));
        std::remove(path2.c_str());
    }
    std::remove(path.c_str());
}

TEST_CASE("B is optional") {
    const auto path = tmp_path("memmap_store_nob.mmj");
    memmap::save_model(sample_model(), path, false);
    CHECK(slurp(path).find("\"B\"") == std::string::npos);
    auto loaded = memmap::load_model(path);
    CHECK(loaded.B.size() == 0);
    std::remove(path.c_str());
}

TEST_CASE("load error contract") {
    SUBCASE("unsupported format_version") {
        const auto path = tmp_path("memmap_store_v99.mmj");
        std::ofstream(path) << "{\"format_version\": 99}";
        CHECK_THROWS_WITH_AS(memmap::load_model(path),
                             doctest::Contains("format_version"),
                             memmap::ParseError);
        std::remove(path.c_str());
    }
    SUBCASE("corrupt document names the problem") {
        const auto path = tmp_path("memmap_store_bad.mmj");
        std::ofstream(path) << "{\"format_version\": 1, \"n\": 1, ";
        CHECK_THROWS_AS(memmap::load_model(path), memmap::ParseError);
        std::remove(path.c_str());
    }
    SUBCASE("non-numeric alpha entry rejected") {
        const auto path = tmp_path("memmap_store_nan.mmj");
        std::ofstream(path)
            << "{\"format_version\": 1, \"n\": 1, \"p\": 1, \"M\": 1, "
               "\"N\": 1, \"nu\": 5.0, \"sigma2\": 1.0, \"sigma_x2\": 0.01, "
               "\"w\": [1.0], \"a\": [0.5], \"alpha\": [null]}";
        CHECK_THROWS_WITH_AS(memmap::load_model(path),
                             doctest::Contains("alpha"), memmap::ParseError);
        std::remove(path.c_str());
    }
    SUBCASE("nu <= 2 rejected") {
        const auto path = tmp_path("memmap_store_nu.mmj");
        std::ofstream(path)
            << "{\"format_version\": 1, \"n\": 1, \"p\": 1, \"M\": 1, "
               "\"N\": 1, \"nu\": 1.5, \"sigma2\": 1.0, \"sigma_x2\": 0.01, "
               "\"w\": [1.0], \"a\": [0.5], \"alpha\": [0.25]}";
        CHECK_THROWS_AS(memmap::load_model(path), memmap::ParseError);
        std::remove(path.c_str());
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(memmap::load_model("/nonexistent/model.mmj"),
                        memmap::IoError);
    }
}
