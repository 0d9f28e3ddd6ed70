#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sfr/csv.hpp"
#include "sfr/dataset.hpp"
#include "sfr/errors.hpp"
#include "sfr/stats.hpp"
#include "sfr/synthetic.hpp"
#include "test_util.hpp"

using namespace sfr;
using test::TempDir;

TEST_CASE("load_csv parses features in header order") {
  TempDir tmp("csv");
  const std::string path = tmp.path("d.csv");
  test::write_file(path, "id,f1,f2,y\na,1,2,3\nb,4,5,6\nc,7,8,9\n");
  CsvLoadOptions opts;
  opts.target_column = "y";
  opts.id_column = "id";
  const Dataset d = load_csv(path, opts);
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.feature_ids == std::vector<std::string>{"f1", "f2"});
  CHECK(d.sample_ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.features.at(1, 0) == 4.0);
  CHECK(d.target == std::vector<double>{3.0, 6.0, 9.0});
  CHECK(!d.baseline);
}

TEST_CASE("load_csv error cases") {
  TempDir tmp("csv_err");
  CsvLoadOptions opts;
  opts.target_column = "y";

  SUBCASE("missing target column") {
    const std::string path = tmp.path("m.csv");
    test::write_file(path, "f1,z\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(load_csv(path, opts), doctest::Contains("'y'"),
                         Error);
  }
  SUBCASE("NaN cell is rejected") {
    const std::string path = tmp.path("nan.csv");
    test::write_file(path, "f1,y\nNaN,2\n3,4\n");
    try {
      load_csv(path, opts);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_finite_value);
    }
  }
  SUBCASE("non-numeric cell reports row and column") {
    const std::string path = tmp.path("bad.csv");
    test::write_file(path, "f1,y\nok,2\n3,4\n");
    try {
      load_csv(path, opts);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_numeric_cell);
      CHECK(std::string(e.what()).find("f1") != std::string::npos);
    }
  }
  SUBCASE("duplicate sample ids") {
    const std::string path = tmp.path("dup.csv");
    test::write_file(path, "id,f1,y\na,1,2\na,3,4\n");
    CsvLoadOptions with_id = opts;
    with_id.id_column = "id";
    try {
      load_csv(path, with_id);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::duplicate_id);
    }
  }
  SUBCASE("single row is too few") {
    const std::string path = tmp.path("one.csv");
    test::write_file(path, "f1,y\n1,2\n");
    try {
      load_csv(path, opts);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::too_few_samples);
    }
  }
  SUBCASE("no feature columns") {
    const std::string path = tmp.path("nofeat.csv");
    test::write_file(path, "y\n1\n2\n");
    try {
      load_csv(path, opts);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::no_features);
    }
  }
}

TEST_CASE("csv round trip is value- and text-exact") {
  SyntheticSpec spec;
  spec.n = 12;
  spec.p = 5;
  spec.k_informative = 2;
  spec.coefficients = {1.5, -0.25};
  spec.noise_sd = 0.7;
  spec.correlation_rho = 0.3;
  spec.seed = 99;
  const Dataset d = generate_synthetic(spec);

  TempDir tmp("roundtrip");
  const std::string first = tmp.path("a.csv");
  const std::string second = tmp.path("b.csv");
  write_csv(d, first);

  CsvLoadOptions opts;
  opts.target_column = "y";
  opts.id_column = "id";
  const Dataset back = load_csv(first, opts);
  CHECK(back.features == d.features);  // bitwise
  CHECK(back.target == d.target);
  CHECK(back.sample_ids == d.sample_ids);

  write_csv(back, second);
  CHECK(test::slurp(first) == test::slurp(second));
}

TEST_CASE("make_target raw change") {
  const std::vector<double> post{5, 7};
  const std::vector<double> pre{3, 4};
  CHECK(make_target(post, pre, TargetMode::raw_change) ==
        std::vector<double>{2, 3});
}

TEST_CASE("make_target raw change is translation equivariant") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> post(6), pre(6);
    for (auto& v : post) v = rng.next_normal() * 10;
    for (auto& v : pre) v = rng.next_normal() * 10;
    const double c = rng.next_normal() * 5;
    auto base = make_target(post, pre, TargetMode::raw_change);
    std::vector<double> shifted_post = post;
    for (auto& v : shifted_post) v += c;
    auto shifted = make_target(shifted_post, pre, TargetMode::raw_change);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(shifted[i] == doctest::Approx(base[i] + c).epsilon(1e-12));
    }
  }
}

TEST_CASE("make_target residualized: exact linear change leaves zeros") {
  const std::vector<double> pre{1, 2, 3, 4};
  std::vector<double> post(4);
  for (std::size_t i = 0; i < 4; ++i) post[i] = pre[i] + 2.0 * pre[i] + 1.0;
  const auto r = make_target(post, pre, TargetMode::residualized_change);
  for (double v : r) CHECK(std::abs(v) < 1e-10);
}

// Five hand-chosen points with pre orthogonal to change. The OLS oracle gives
// slope 0 and intercept mean(change) = 0.2, so residuals are change - 0.2.
TEST_CASE("make_target residualized: hand-computed OLS oracle") {
  const std::vector<double> pre{60, 70, 80, 90, 100};
  const std::vector<double> post{61, 68, 83, 88, 101};
  // change = {1, -2, 3, -2, 1}; sum of change_i * (pre_i - 80) = 0.
  const OlsFit oracle = ols_fit(pre, std::vector<double>{1, -2, 3, -2, 1});
  CHECK(oracle.slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(oracle.intercept == doctest::Approx(0.2).epsilon(1e-12));

  const auto r = make_target(post, pre, TargetMode::residualized_change);
  const std::vector<double> expected{0.8, -2.2, 2.8, -2.2, 0.8};
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("make_target residualized output is uncorrelated with baseline") {
  Rng rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> pre(8), post(8);
    for (auto& v : pre) v = 50 + 10 * rng.next_normal();
    for (std::size_t i = 0; i < 8; ++i) {
      post[i] = pre[i] + 3 * rng.next_normal();
    }
    const auto r = make_target(post, pre, TargetMode::residualized_change);
    CHECK(std::abs(pearson(r, pre)) < 1e-10);
  }
}

TEST_CASE("make_target residualized rejects constant baseline") {
  const std::vector<double> pre{5, 5, 5};
  const std::vector<double> post{1, 2, 3};
  try {
    make_target(post, pre, TargetMode::residualized_change);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::degenerate_baseline);
  }
}

TEST_CASE("standardize_target") {
  SUBCASE("symmetric triple") {
    const auto [z, st] = standardize_target(std::vector<double>{1, 2, 3});
    CHECK(z == std::vector<double>{-1, 0, 1});
    CHECK(st.mean == 2.0);
    CHECK(st.sd == 1.0);
  }
  SUBCASE("constant input") {
    try {
      standardize_target(std::vector<double>{5, 5, 5});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::zero_variance);
    }
  }
  SUBCASE("standardized output has mean 0 and sd 1") {
    const std::vector<double> y{2, 4, 4, 4, 5, 5, 7, 9};
    const auto [z, st] = standardize_target(y);
    CHECK(mean(z) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sample_sd(z) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(st.invert(z[i]) == doctest::Approx(y[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("generate_synthetic") {
  SUBCASE("zero-noise identity") {
    SyntheticSpec spec;
    spec.n = 4;
    spec.p = 2;
    spec.k_informative = 1;
    spec.coefficients = {1.0};
    spec.noise_sd = 0.0;
    spec.seed = 7;
    const Dataset d = generate_synthetic(spec);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(d.target[i] == d.features.at(i, 0));
    }
  }
  SUBCASE("pure function of the spec") {
    SyntheticSpec spec;
    spec.n = 10;
    spec.p = 4;
    spec.k_informative = 2;
    spec.coefficients = {2.0, -1.0};
    spec.noise_sd = 0.5;
    spec.correlation_rho = 0.4;
    spec.seed = 123;
    const Dataset a = generate_synthetic(spec);
    const Dataset b = generate_synthetic(spec);
    CHECK(a.features == b.features);
    CHECK(a.target == b.target);
  }
  SUBCASE("large-sample OLS slope recovers the coefficient") {
    SyntheticSpec spec;
    spec.n = 1000;
    spec.p = 2;
    spec.k_informative = 1;
    spec.coefficients = {2.0};
    spec.noise_sd = 1.0;
    spec.seed = 11;
    const Dataset d = generate_synthetic(spec);
    std::vector<double> f0(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) f0[i] = d.features.at(i, 0);
    const OlsFit fit = ols_fit(f0, d.target);
    CHECK(fit.slope > 1.9);
    CHECK(fit.slope < 2.1);
  }
  SUBCASE("invalid specs are rejected") {
    SyntheticSpec spec;
    spec.n = 10;
    spec.p = 3;
    spec.k_informative = 5;
    spec.coefficients = {1, 1, 1, 1, 1};
    try {
      generate_synthetic(spec);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == errc::invalid_spec);
    }
  }
  SUBCASE("equicorrelated features have roughly rho sample correlation") {
    SyntheticSpec spec;
    spec.n = 2000;
    spec.p = 2;
    spec.k_informative = 0;
    spec.noise_sd = 1.0;
    spec.correlation_rho = 0.6;
    spec.seed = 5;
    const Dataset d = generate_synthetic(spec);
    std::vector<double> a(d.n()), b(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
      a[i] = d.features.at(i, 0);
      b[i] = d.features.at(i, 1);
    }
    CHECK(pearson(a, b) == doctest::Approx(0.6).epsilon(0.15));
  }
}

TEST_CASE("subset helpers preserve alignment") {
  const Dataset d = test::make_dataset({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}},
                                       {10, 20, 30});
  const std::vector<std::size_t> rows{2, 0};
  const Dataset s = subset_samples(d, rows);
  CHECK(s.n() == 2);
  CHECK(s.target == std::vector<double>{30, 10});
  CHECK(s.features.at(0, 2) == 9.0);

  const std::vector<std::size_t> cols{1};
  const Dataset f = subset_features(d, cols);
  CHECK(f.p() == 1);
  CHECK(f.feature_ids == std::vector<std::string>{"f1"});
  CHECK(f.features.at(2, 0) == 6.0);
}
