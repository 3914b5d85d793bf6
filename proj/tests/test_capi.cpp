#include "doctest.h"
#include "nestband/nestband.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

nb_matrix* make(size_t r, size_t c, std::vector<double> v) {
  nb_matrix* m = nullptr;
  REQUIRE(nb_matrix_create(r, c, v.data(), &m) == NB_OK);
  return m;
}

double at(const nb_matrix* m, size_t r, size_t c) {
  double v = 0;
  REQUIRE(nb_matrix_get(m, r, c, &v) == NB_OK);
  return v;
}

}  // namespace

TEST_CASE("matrix handles") {
  nb_matrix* m = make(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(nb_matrix_rows(m) == 2);
  CHECK(nb_matrix_cols(m) == 3);
  CHECK(at(m, 1, 0) == 4);
  double buf[6];
  CHECK(nb_matrix_copy(m, buf, 6) == NB_OK);
  CHECK(buf[5] == 6);
  CHECK(nb_matrix_copy(m, buf, 5) == NB_ERR_ARGUMENT);
  double v;
  CHECK(nb_matrix_get(m, 2, 0, &v) == NB_ERR_ARGUMENT);
  CHECK(std::string(nb_last_error()) == "index out of range");
  nb_matrix_free(m);

  nb_matrix* z = nullptr;
  CHECK(nb_matrix_create(0, 2, buf, &z) == NB_ERR_ARGUMENT);
  CHECK(nb_matrix_create(1, 1, nullptr, &z) == NB_ERR_ARGUMENT);
  CHECK(z == nullptr);
  nb_matrix_free(nullptr);
  nb_fit_free(nullptr);
  nb_model_free(nullptr);
  nb_report_free(nullptr);
}

TEST_CASE("csv round trip and io errors") {
  const auto path = std::filesystem::temp_directory_path() / "nb_capi_rt.csv";
  nb_matrix* m = make(2, 2, {0.5, -1, 1e-3, 2});
  REQUIRE(nb_matrix_write_csv(m, path.string().c_str()) == NB_OK);
  nb_matrix* back = nullptr;
  REQUIRE(nb_matrix_read_csv(path.string().c_str(), &back) == NB_OK);
  for (size_t r = 0; r < 2; ++r)
    for (size_t c = 0; c < 2; ++c) CHECK(at(back, r, c) == at(m, r, c));
  nb_matrix_free(back);
  nb_matrix_free(m);
  std::filesystem::remove(path);

  nb_matrix* none = nullptr;
  CHECK(nb_matrix_read_csv("/nonexistent/dir/x.csv", &none) == NB_ERR_IO);
  CHECK(std::string(nb_last_error()).size() > 0);

  const auto bad = std::filesystem::temp_directory_path() / "nb_capi_bad.csv";
  {
    FILE* f = std::fopen(bad.string().c_str(), "w");
    std::fputs("1,2\n3,x\n", f);
    std::fclose(f);
  }
  CHECK(nb_matrix_read_csv(bad.string().c_str(), &none) == NB_ERR_PARSE);
  std::filesystem::remove(bad);
}

TEST_CASE("estimator creation") {
  nb_estimator* e = nullptr;
  REQUIRE(nb_estimator_create("lasso", nullptr, 10, 100, &e) == NB_OK);
  CHECK(nb_estimator_candidates(e) == 10);
  CHECK(std::string(nb_estimator_family(e)) == "lasso");
  nb_estimator_free(e);

  REQUIRE(nb_estimator_create("banding", "k=0..3", 10, 100, &e) == NB_OK);
  CHECK(nb_estimator_candidates(e) == 4);
  nb_estimator_free(e);

  CHECK(nb_estimator_create("ridge", nullptr, 10, 100, &e) == NB_ERR_ARGUMENT);
  CHECK(std::string(nb_last_error()).find("ridge") != std::string::npos);
  CHECK(nb_estimator_create("lasso", "lambda=abc", 10, 100, &e) == NB_ERR_PARSE);
  CHECK(nb_estimator_create(nullptr, nullptr, 10, 100, &e) == NB_ERR_ARGUMENT);
}

TEST_CASE("sample fit on two observations") {
  // rows (1), (-1): mean 0, covariance (1 + 1) / 2 = 1
  nb_matrix* x = make(2, 1, {1, -1});
  nb_estimator* e = nullptr;
  REQUIRE(nb_estimator_create("sample", nullptr, 1, 2, &e) == NB_OK);
  nb_fit* f = nullptr;
  REQUIRE(nb_fit_kfold(x, e, nullptr, 5, 1, &f) == NB_OK);
  nb_matrix* s = nullptr;
  REQUIRE(nb_fit_covariance(f, &s) == NB_OK);
  CHECK(at(s, 0, 0) == doctest::Approx(1.0));
  CHECK(nb_fit_has_factors(f) == 0);
  nb_matrix* t = nullptr;
  CHECK(nb_fit_factor(f, &t) == NB_ERR_DOMAIN);
  nb_matrix_free(s);
  nb_fit_free(f);
  nb_estimator_free(e);
  nb_matrix_free(x);
}

TEST_CASE("singular sample precision") {
  nb_matrix* x = make(2, 3, {1, 2, 3, -1, -2, -3});
  nb_estimator* e = nullptr;
  REQUIRE(nb_estimator_create("sample", nullptr, 3, 2, &e) == NB_OK);
  nb_fit* f = nullptr;
  REQUIRE(nb_fit_kfold(x, e, nullptr, 2, 1, &f) == NB_OK);
  CHECK(nb_fit_is_singular(f) == 1);
  nb_matrix* w = nullptr;
  CHECK(nb_fit_precision(f, &w) == NB_ERR_SINGULAR);
  nb_matrix* sigma = nullptr;
  REQUIRE(nb_model_create("sigma1", 3, 0, nullptr, 1, 0, nullptr) == NB_ERR_ARGUMENT);
  nb_model* m = nullptr;
  REQUIRE(nb_model_create("sigma1", 3, 0, nullptr, 1, 0, &m) == NB_OK);
  REQUIRE(nb_model_sigma(m, &sigma) == NB_OK);
  nb_matrix* s = nullptr;
  REQUIRE(nb_fit_covariance(f, &s) == NB_OK);
  double kl = 0;
  int na = 0;
  REQUIRE(nb_kl_loss(sigma, s, &kl, &na) == NB_OK);
  CHECK(na == 1);
  CHECK(std::isnan(kl));
  nb_matrix_free(s);
  nb_matrix_free(sigma);
  nb_model_free(m);
  nb_fit_free(f);
  nb_estimator_free(e);
  nb_matrix_free(x);
}

TEST_CASE("model handles") {
  nb_model* m = nullptr;
  REQUIRE(nb_model_create("sigma1", 2, 0, nullptr, 1, 0, &m) == NB_OK);
  // T = [1 0; -0.8 1], D = 0.01 I: Omega = T'D^-1 T
  nb_matrix* w = nullptr;
  REQUIRE(nb_model_omega(m, &w) == NB_OK);
  CHECK(at(w, 0, 0) == doctest::Approx(164));
  CHECK(at(w, 0, 1) == doctest::Approx(-80));
  CHECK(at(w, 1, 1) == doctest::Approx(100));
  nb_matrix* t = nullptr;
  REQUIRE(nb_model_factor(m, &t) == NB_OK);
  CHECK(at(t, 1, 0) == doctest::Approx(-0.8));
  CHECK(std::string(nb_model_warning(m)).empty());

  nb_matrix* a = nullptr;
  nb_matrix* b = nullptr;
  REQUIRE(nb_model_sample(m, "gaussian", 50, 7, 3, &a) == NB_OK);
  REQUIRE(nb_model_sample(m, "gaussian", 50, 7, 3, &b) == NB_OK);
  CHECK(nb_matrix_rows(a) == 50);
  CHECK(nb_matrix_cols(a) == 2);
  for (size_t i = 0; i < 50; ++i) CHECK(at(a, i, 1) == at(b, i, 1));
  nb_matrix* c = nullptr;
  CHECK(nb_model_sample(m, "cauchy", 5, 1, 0, &c) == NB_ERR_PARSE);
  CHECK(nb_model_sample(m, "t3", 0, 1, 0, &c) == NB_ERR_ARGUMENT);
  nb_matrix_free(a);
  nb_matrix_free(b);
  nb_matrix_free(t);
  nb_matrix_free(w);
  nb_model_free(m);

  REQUIRE(nb_model_create("sigma3", 12, 3, "width", 4, 0, &m) == NB_OK);
  nb_model_free(m);
  CHECK(nb_model_create("sigma3", 12, 3, "diagonal", 4, 0, &m) == NB_ERR_PARSE);
  CHECK(nb_model_create("sigma9", 12, 0, nullptr, 4, 0, &m) == NB_ERR_PARSE);
}

TEST_CASE("adaptive fit exposes factor parts") {
  nb_model* m = nullptr;
  REQUIRE(nb_model_create("sigma1", 6, 0, nullptr, 1, 0, &m) == NB_OK);
  nb_matrix* train = nullptr;
  nb_matrix* valid = nullptr;
  REQUIRE(nb_model_sample(m, "gaussian", 200, 2, 0, &train) == NB_OK);
  REQUIRE(nb_model_sample(m, "gaussian", 200, 2, 1, &valid) == NB_OK);
  nb_estimator* e = nullptr;
  REQUIRE(nb_estimator_create("j2", "lambda=0.01,0.1,1", 6, 200, &e) == NB_OK);
  nb_fit_options o = nb_fit_options_default();
  CHECK(o.solver == NB_SOLVER_SHOOTING);
  CHECK(o.max_iters == 100);
  nb_fit* f = nullptr;
  REQUIRE(nb_fit_validation(train, valid, e, &o, &f) == NB_OK);
  CHECK(std::string(nb_fit_parameters(f)).find("lambda=") == 0);

  nb_matrix *t = nullptr, *d = nullptr, *k = nullptr, *w = nullptr;
  REQUIRE(nb_fit_factor(f, &t) == NB_OK);
  REQUIRE(nb_fit_variances(f, &d) == NB_OK);
  REQUIRE(nb_fit_bandwidths(f, &k) == NB_OK);
  REQUIRE(nb_fit_precision(f, &w) == NB_OK);
  CHECK(nb_matrix_cols(d) == 1);
  CHECK(at(k, 0, 0) == 0);
  for (size_t j = 0; j < 6; ++j) {
    CHECK(at(t, j, j) == 1);
    CHECK(at(d, j, 0) > 0);
  }
  // Omega = T' D^-1 T
  for (size_t r = 0; r < 6; ++r)
    for (size_t c = 0; c < 6; ++c) {
      double s = 0;
      for (size_t j = 0; j < 6; ++j) s += at(t, j, r) * at(t, j, c) / at(d, j, 0);
      CHECK(at(w, r, c) == doctest::Approx(s).epsilon(1e-9));
    }

  o.solver = static_cast<nb_solver>(7);
  nb_fit* g = nullptr;
  CHECK(nb_fit_kfold(train, e, &o, 5, 1, &g) == NB_ERR_ARGUMENT);
  o = nb_fit_options_default();
  o.max_iters = 0;
  CHECK(nb_fit_kfold(train, e, &o, 5, 1, &g) == NB_ERR_DOMAIN);

  for (nb_matrix* x : {t, d, k, w, train, valid}) nb_matrix_free(x);
  nb_fit_free(f);
  nb_estimator_free(e);
  nb_model_free(m);
}

TEST_CASE("losses") {
  nb_matrix* a = make(2, 2, {1, 0, 0, 1});
  nb_matrix* b = make(2, 2, {4, 0, 0, -3});
  double out[4];
  REQUIRE(nb_norm_losses(a, b, out) == NB_OK);
  // difference diag(3, -4)
  CHECK(out[0] == doctest::Approx(4));
  CHECK(out[1] == doctest::Approx(4));
  CHECK(out[2] == doctest::Approx(5));
  CHECK(out[3] == doctest::Approx(4));

  nb_matrix* s1 = make(1, 1, {1});
  nb_matrix* s2 = make(1, 1, {2});
  double kl = 0, en = 0;
  int na = 1;
  REQUIRE(nb_kl_loss(s1, s2, &kl, &na) == NB_OK);
  CHECK(na == 0);
  CHECK(kl == doctest::Approx(0.5 - std::log(0.5) - 1));
  REQUIRE(nb_entropy_loss(s1, s2, &en, nullptr) == NB_OK);
  CHECK(en == doctest::Approx(2 - std::log(2.0) - 1));
  REQUIRE(nb_kl_loss(a, a, &kl, &na) == NB_OK);
  CHECK(kl == 0);
  CHECK(nb_kl_loss(a, s1, &kl, &na) != NB_OK);
  CHECK(nb_kl_loss(nullptr, s1, &kl, &na) == NB_ERR_ARGUMENT);
  for (nb_matrix* x : {a, b, s1, s2}) nb_matrix_free(x);
}

TEST_CASE("zero frequency") {
  nb_matrix* t1 = make(3, 3, {1, 0, 0, -0.5, 1, 0, 0, -0.5, 1});
  nb_matrix* t2 = make(3, 3, {1, 0, 0, 0, 1, 0, -0.2, -0.5, 1});
  const nb_matrix* fits[] = {t1, t2};
  nb_matrix* z = nullptr;
  REQUIRE(nb_zero_frequency(fits, 2, NB_LEVEL_FACTOR, 0.0, &z) == NB_OK);
  CHECK(at(z, 1, 0) == doctest::Approx(0.5));
  CHECK(at(z, 2, 0) == doctest::Approx(0.5));
  CHECK(at(z, 2, 1) == doctest::Approx(0));
  nb_matrix_free(z);
  CHECK(nb_zero_frequency(fits, 2, static_cast<nb_level>(9), 0.0, &z) == NB_ERR_ARGUMENT);
  nb_matrix_free(t1);
  nb_matrix_free(t2);
}

TEST_CASE("classifier through the C interface") {
  // two well separated classes in 2-D
  std::vector<double> v;
  std::vector<const char*> names;
  for (int i = 0; i < 20; ++i) {
    const double s = (i % 5) * 0.1, u = (i % 3) * 0.1;
    const bool a = i < 10;
    v.push_back((a ? -5 : 5) + s);
    v.push_back((a ? -5 : 5) + u);
    names.push_back(a ? "a" : "b");
  }
  nb_matrix* x = make(20, 2, v);
  nb_labels* l = nullptr;
  REQUIRE(nb_labels_create(names.data(), names.size(), &l) == NB_OK);
  CHECK(nb_labels_count(l) == 20);
  CHECK(std::string(nb_labels_get(l, 19)) == "b");

  for (const char* kind : {"lda", "qda", "naive-bayes"}) {
    CAPTURE(kind);
    nb_estimator* e = nullptr;
    REQUIRE(nb_estimator_create("sample", nullptr, 2, 20, &e) == NB_OK);
    nb_classifier* c = nullptr;
    REQUIRE(nb_classifier_fit(kind, x, l, std::string(kind) == "naive-bayes" ? nullptr : e, nullptr, 5, 1, &c) ==
            NB_OK);
    CHECK(nb_classifier_classes(c) == 2);
    CHECK(std::string(nb_classifier_class(c, 0)) == "a");
    const double q[2] = {4.5, 4.8};
    size_t k = 9;
    REQUIRE(nb_classifier_predict(c, q, 2, &k) == NB_OK);
    CHECK(k == 1);
    double scores[2];
    REQUIRE(nb_classifier_scores(c, q, 2, scores) == NB_OK);
    CHECK(scores[1] > scores[0]);
    size_t errors = 99;
    double rate = 1;
    REQUIRE(nb_classifier_test_error(c, x, l, &errors, &rate) == NB_OK);
    CHECK(errors == 0);
    CHECK(rate == 0);
    nb_classifier_free(c);
    nb_estimator_free(e);
  }
  nb_classifier* c = nullptr;
  CHECK(nb_classifier_fit("lda", x, l, nullptr, nullptr, 5, 1, &c) == NB_ERR_ARGUMENT);
  CHECK(nb_classifier_fit("svm", x, l, nullptr, nullptr, 5, 1, &c) == NB_ERR_PARSE);
  nb_labels_free(l);
  nb_matrix_free(x);
}

TEST_CASE("config and benchmark") {
  CHECK(nb_config_key_count() > 10);
  CHECK(std::string(nb_config_key_name(0)) == "model");
  CHECK(std::string(nb_config_key_help(0)).size() > 0);
  CHECK(std::string(nb_config_key_name(100000)).empty());

  nb_config* c = nullptr;
  REQUIRE(nb_config_create(&c) == NB_OK);
  for (auto [k, v] : std::vector<std::pair<const char*, const char*>>{{"p", "5"},
                                                                      {"n_train", "20"},
                                                                      {"n_valid", "20"},
                                                                      {"replications", "3"},
                                                                      {"estimators", "sample,lasso,banding"},
                                                                      {"grid.lasso", "lambda=0.1,1"},
                                                                      {"seed", "9"}})
    REQUIRE(nb_config_set(c, k, v) == NB_OK);
  CHECK(nb_config_set(c, "bogus", "1") == NB_ERR_PARSE);
  CHECK(nb_config_set(c, "p", "many") == NB_ERR_PARSE);
  CHECK(nb_config_read(c, "/nonexistent/exp.cfg") == NB_ERR_IO);

  nb_report* a = nullptr;
  nb_report* b = nullptr;
  REQUIRE(nb_benchmark_run(c, 1, &a) == NB_OK);
  REQUIRE(nb_benchmark_run(c, 2, &b) == NB_OK);
  const std::string sa = nb_report_summary_csv(a);
  CHECK(sa == nb_report_summary_csv(b));
  CHECK(sa.find("banding") != std::string::npos);
  CHECK(std::string(nb_report_replications_csv(a)) == nb_report_replications_csv(b));

  const auto dir = std::filesystem::temp_directory_path() / "nb_capi_report";
  std::filesystem::remove_all(dir);
  REQUIRE(nb_report_write(a, dir.string().c_str()) == NB_OK);
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "replications.csv"));
  std::filesystem::remove_all(dir);

  nb_report_free(a);
  nb_report_free(b);
  nb_config_free(c);
  CHECK(nb_benchmark_run(nullptr, 1, &a) == NB_ERR_ARGUMENT);
}

TEST_CASE("version strings") {
  CHECK(std::string(nb_version()).size() > 0);
  CHECK(std::string(nb_rng_algorithm()) == "mt64-sm64-polar/1");
}
