#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "itsf/decompose.hpp"
#include "itsf/spline.hpp"

using namespace itsf;
using Eigen::ArrayXcd;
using Eigen::ArrayXd;
using cplx = std::complex<double>;

namespace {

ArrayXd arr(std::initializer_list<double> v) {
    ArrayXd a(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) a[i++] = x;
    return a;
}

// Smooth-plus-noise complex test signal with reproducible coefficients.
ArrayXcd random_signal(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 3.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 0.3);
    ArrayXcd s(n);
    double a1 = amp(rng), a2 = amp(rng), p1 = phase(rng), p2 = phase(rng);
    for (int t = 0; t < n; ++t) {
        double re = a1 * std::sin(2.0 * std::numbers::pi * t / 12.0 + p1) + 0.05 * t + noise(rng);
        double im = a2 * std::sin(2.0 * std::numbers::pi * t / 7.0 + p2) + 4.0 + noise(rng);
        s[t] = {re, im};
    }
    return s;
}

double corr(const ArrayXd& a, const ArrayXd& b) {
    double ma = a.mean(), mb = b.mean();
    double num = ((a - ma) * (b - mb)).sum();
    double den = std::sqrt((a - ma).square().sum() * (b - mb).square().sum());
    return num / den;
}

}  // namespace

TEST_CASE("local maxima rule: strict rise, flat-or-fall, interior only") {
    auto idx = find_local_maxima(arr({0, 2, 1, 2, 0}));
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] == 1);
    CHECK(idx[1] == 3);

    // plateau counts once, at its first index
    idx = find_local_maxima(arr({0, 1, 1, 0}));
    REQUIRE(idx.size() == 1);
    CHECK(idx[0] == 1);

    // rising into a plateau that never falls is still a maximum at entry
    idx = find_local_maxima(arr({0, 1, 1, 1}));
    REQUIRE(idx.size() == 1);
    CHECK(idx[0] == 1);

    // endpoints are never maxima
    CHECK(find_local_maxima(arr({3, 2, 1})).empty());
    CHECK(find_local_maxima(arr({1, 2, 3})).empty());

    CHECK_THROWS_AS(find_local_maxima(arr({1, 2})), DataError);
}

TEST_CASE("projection picks out the advertised direction") {
    ArrayXcd s(3);
    s << cplx(1, 10), cplx(2, 20), cplx(3, 30);
    ArrayXd re = project(s, 2.0 * std::numbers::pi);  // cos=1, sin=0
    ArrayXd im = project(s, std::numbers::pi / 2.0);
    for (int t = 0; t < 3; ++t) {
        CHECK(re[t] == doctest::Approx(s[t].real()).epsilon(1e-12));
        CHECK(im[t] == doctest::Approx(s[t].imag()).epsilon(1e-12));
    }
}

TEST_CASE("direction envelope interpolates the complex samples at the maxima") {
    ArrayXcd s = random_signal(60, 42);
    double phi = 2.0 * std::numbers::pi * 13.0 / 64.0;
    auto idx = find_local_maxima(project(s, phi));
    REQUIRE(idx.size() >= 2);
    ArrayXcd env = direction_envelope(s, phi);
    REQUIRE(env.size() == s.size());
    for (Eigen::Index t : idx) {
        CHECK(env[t].real() == doctest::Approx(s[t].real()).epsilon(1e-10));
        CHECK(env[t].imag() == doctest::Approx(s[t].imag()).epsilon(1e-10));
    }
}

TEST_CASE("direction envelope uses two mirrored knots per side") {
    // Real-part projection (phi = 2 pi) with maxima exactly at t = 1 and 3.
    ArrayXcd s(5);
    s << cplx(0, 1), cplx(3, -2), cplx(1, 0.5), cplx(4, 2), cplx(0, -1);
    ArrayXcd env = direction_envelope(s, 2.0 * std::numbers::pi);

    // Re-derive the expected spline: knot times mirrored about t=0 and t=4.
    ArrayXd kt = arr({-3, -1, 1, 3, 5, 7});
    Eigen::ArrayXcd ky(6);
    ky << s[3], s[1], s[1], s[3], s[3], s[1];
    ArrayXcd expect = natural_cubic_spline<cplx>(kt, ky, arr({0, 1, 2, 3, 4}));
    for (int t = 0; t < 5; ++t) {
        CHECK(env[t].real() == doctest::Approx(expect[t].real()).epsilon(1e-12));
        CHECK(env[t].imag() == doctest::Approx(expect[t].imag()).epsilon(1e-12));
    }
}

TEST_CASE("envelope requires two maxima along the direction") {
    ArrayXcd mono(5);
    for (int t = 0; t < 5; ++t) mono[t] = cplx(t, 2.0 * t);  // monotone projections
    CHECK_THROWS_AS(direction_envelope(mono, 2.0 * std::numbers::pi), InsufficientExtremaError);
    ArrayXcd tiny(2);
    tiny << cplx(0, 0), cplx(1, 1);
    CHECK_THROWS_AS(direction_envelope(tiny, 1.0), InsufficientExtremaError);

    SiftConfig cfg;
    CHECK_THROWS_AS(mean_envelope(mono, cfg), InsufficientExtremaError);
}

TEST_CASE("mean envelope averages the direction envelopes") {
    ArrayXcd s = random_signal(50, 7);
    SiftConfig cfg;
    cfg.num_directions = 8;
    ArrayXcd mean = mean_envelope(s, cfg);
    ArrayXcd acc = ArrayXcd::Zero(s.size());
    for (int m = 1; m <= 8; ++m)
        acc += direction_envelope(s, 2.0 * std::numbers::pi * m / 8.0);
    acc /= 8.0;
    for (Eigen::Index t = 0; t < s.size(); ++t)
        CHECK(std::abs(mean[t] - acc[t]) < 1e-12);
}

TEST_CASE("sifting drives the mean envelope toward zero") {
    ArrayXcd s = random_signal(80, 3);
    SiftConfig cfg;
    SiftResult r = sift(s, cfg);
    CHECK(r.converged);
    CHECK(r.iterations >= 1);
    // the extracted component's own mean envelope is small next to the input's
    ArrayXcd env_in = mean_envelope(s, cfg);
    ArrayXcd env_out = mean_envelope(r.imf, cfg);
    double before = std::sqrt(env_in.abs2().mean());
    double after = std::sqrt(env_out.abs2().mean());
    CHECK(after < 0.25 * before);
}

TEST_CASE("pure rotating tone survives as a single component") {
    ArrayXcd s(120);
    for (int t = 0; t < 120; ++t) {
        double w = 2.0 * std::numbers::pi * t / 8.0;
        s[t] = {std::cos(w), std::sin(w)};
    }
    SiftConfig cfg;
    ComplexDecomposition d = bemd_decompose(s, cfg);
    REQUIRE(d.imfs.size() == 1);
    CHECK(corr(d.imfs[0].real(), s.real()) >= 0.99);
    CHECK(corr(d.imfs[0].imag(), s.imag()) >= 0.99);
}

TEST_CASE("components sum back to the input") {
    for (std::uint64_t seed : {1ULL, 2ULL, 9ULL}) {
        ArrayXcd s = random_signal(120, seed);
        SiftConfig cfg;
        ComplexDecomposition d = bemd_decompose(s, cfg);
        CHECK(d.imfs.size() >= 1);
        CHECK(d.sift_counts.size() == d.imfs.size());
        double err = std::sqrt((d.reconstruct() - s).abs2().maxCoeff());
        CHECK(err < 1e-8);
    }
}

TEST_CASE("swapping the bound slots swaps the component parts") {
    // With directions symmetric under quarter-turn, exchanging real and
    // imaginary parts of the input must exchange them in every component.
    ArrayXcd a = random_signal(100, 21);
    ArrayXcd b(a.size());
    for (Eigen::Index t = 0; t < a.size(); ++t) b[t] = cplx(a[t].imag(), a[t].real());

    SiftConfig cfg;  // 64 directions, divisible by 4
    ComplexDecomposition da = bemd_decompose(a, cfg);
    ComplexDecomposition db = bemd_decompose(b, cfg);
    REQUIRE(da.imfs.size() == db.imfs.size());
    for (size_t k = 0; k < da.imfs.size(); ++k)
        for (Eigen::Index t = 0; t < a.size(); ++t) {
            CHECK(da.imfs[k][t].real() == doctest::Approx(db.imfs[k][t].imag()).epsilon(1e-6));
            CHECK(da.imfs[k][t].imag() == doctest::Approx(db.imfs[k][t].real()).epsilon(1e-6));
        }
    for (Eigen::Index t = 0; t < a.size(); ++t)
        CHECK(da.residual[t].real() == doctest::Approx(db.residual[t].imag()).epsilon(1e-6));
}

TEST_CASE("decomposition is deterministic") {
    ArrayXcd s = random_signal(90, 33);
    SiftConfig cfg;
    ComplexDecomposition a = bemd_decompose(s, cfg);
    ComplexDecomposition b = bemd_decompose(s, cfg);
    REQUIRE(a.imfs.size() == b.imfs.size());
    for (size_t k = 0; k < a.imfs.size(); ++k)
        CHECK((a.imfs[k] == b.imfs[k]).all());
    CHECK((a.residual == b.residual).all());
}

TEST_CASE("component cap truncates the expansion") {
    ArrayXcd s = random_signal(120, 5);
    SiftConfig cfg;
    ComplexDecomposition full = bemd_decompose(s, cfg);
    REQUIRE(full.imfs.size() >= 2);
    cfg.max_imfs = 1;
    ComplexDecomposition capped = bemd_decompose(s, cfg);
    CHECK(capped.imfs.size() == 1);
    // the first component does not depend on the cap
    CHECK((capped.imfs[0] == full.imfs[0]).all());
    double err = std::sqrt((capped.reconstruct() - s).abs2().maxCoeff());
    CHECK(err < 1e-8);
}

TEST_CASE("real-valued variant mirrors the complex one") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 0.2);
    ArrayXd s(100);
    for (int t = 0; t < 100; ++t)
        s[t] = std::sin(2.0 * std::numbers::pi * t / 10.0) + 0.03 * t + noise(rng);
    SiftConfig cfg;
    RealDecomposition d = emd_decompose(s, cfg);
    CHECK(d.imfs.size() >= 1);
    double err = (d.reconstruct() - s).abs().maxCoeff();
    CHECK(err < 1e-8);

    // monotone input has no oscillation to extract
    ArrayXd mono = ArrayXd::LinSpaced(30, 0.0, 3.0);
    RealDecomposition dm = emd_decompose(mono, cfg);
    CHECK(dm.imfs.empty());
    CHECK((dm.residual == mono).all());
}

TEST_CASE("decomposition rejects bad inputs and configs") {
    SiftConfig cfg;
    ArrayXcd tiny(2);
    tiny << cplx(0, 0), cplx(1, 1);
    CHECK_THROWS_AS(bemd_decompose(tiny, cfg), DataError);

    ArrayXcd ok = random_signal(20, 1);
    SiftConfig bad = cfg;
    bad.num_directions = 6;  // not divisible by 4
    CHECK_THROWS_AS(bemd_decompose(ok, bad), DataError);
    bad = cfg;
    bad.num_directions = 0;
    CHECK_THROWS_AS(bemd_decompose(ok, bad), DataError);
    bad = cfg;
    bad.sd_threshold = 0.0;
    CHECK_THROWS_AS(bemd_decompose(ok, bad), DataError);
    bad = cfg;
    bad.max_sift_iterations = 0;
    CHECK_THROWS_AS(bemd_decompose(ok, bad), DataError);
    bad = cfg;
    bad.max_imfs = -1;
    CHECK_THROWS_AS(bemd_decompose(ok, bad), DataError);
}

TEST_CASE("decomposition dump is long-format with re/im rows") {
    ArrayXcd s = random_signal(48, 8);
    SiftConfig cfg;
    ComplexDecomposition d = bemd_decompose(s, cfg);
    REQUIRE(d.imfs.size() >= 1);
    std::ostringstream out;
    write_decomposition_csv(d, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,component,part,value");
    size_t rows = 0;
    bool saw_imf1 = false, saw_residual = false;
    while (std::getline(in, line)) {
        ++rows;
        if (line.find(",imf1,") != std::string::npos) saw_imf1 = true;
        if (line.find(",residual,") != std::string::npos) saw_residual = true;
    }
    CHECK(rows == (d.imfs.size() + 1) * 48 * 2);
    CHECK(saw_imf1);
    CHECK(saw_residual);
}
