#include "chitf/analysis.hpp"
#include "chitf/errors.hpp"
#include "chitf/model.hpp"
#include "chitf/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace chitf;

namespace {

// One tensor over the given modalities, factors supplied directly.
FittedModel model_of(const Matrix& shared, const std::vector<std::pair<std::string, Matrix>>& mods) {
  ModelSpec spec;
  spec.rank = static_cast<std::size_t>(shared.cols());
  InteractionTensorSpec t{"t", {}, Distribution::Poisson, 1e-9};
  std::vector<FactorMatrix> factors;
  std::vector<std::vector<std::string>> ids;
  for (const auto& [name, m] : mods) {
    t.modalities.push_back(name);
    factors.emplace_back(m);
    ids.push_back(synthetic_ids(name + "_", static_cast<std::size_t>(m.rows())));
    spec.datatypes[name] = DataType::Integer;
  }
  spec.tensors.push_back(t);
  return FittedModel::from_factors(spec, FactorMatrix(shared), std::move(factors),
                                   synthetic_ids("p", static_cast<std::size_t>(shared.rows())), ids);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Sum of the full tensor over the population and every other modality, row j, normalized.
std::vector<double> slice_sum_oracle(const Matrix& s, const Matrix& a, const Matrix& b, const Matrix& c,
                                     const std::vector<std::size_t>& pop, Eigen::Index j) {
  std::vector<double> row(static_cast<std::size_t>(b.rows()), 0.0);
  for (std::size_t p : pop) {
    for (Eigen::Index l = 0; l < b.rows(); ++l) {
      for (Eigen::Index k = 0; k < c.rows(); ++k) {
        for (Eigen::Index r = 0; r < s.cols(); ++r) {
          row[static_cast<std::size_t>(l)] += s(static_cast<Eigen::Index>(p), r) * a(j, r) * b(l, r) * c(k, r);
        }
      }
    }
  }
  double total = 0.0;
  for (double x : row) total += x;
  for (double& x : row) x /= total;
  return row;
}

}  // namespace

TEST_CASE("correspondence of a rank-1 model is the target column for every anchor") {
  std::mt19937_64 rng(1);
  const Matrix s = oracle::random_matrix(5, 1, rng), a = oracle::random_matrix(4, 1, rng),
               b = oracle::random_matrix(6, 1, rng);
  const FittedModel model = model_of(s, {{"A", a}, {"B", b}});
  const auto pop = all_rows(5);
  for (std::size_t j = 0; j < 4; ++j) {
    const CorrespondenceRow row = extract_correspondence(model, "t", "A", j, "B", pop);
    CHECK(row.anchor_id == "A_00" + std::to_string(j));
    CHECK(row.base_population_size == 5);
    for (Eigen::Index l = 0; l < 6; ++l) {
      CHECK(row.scores[static_cast<std::size_t>(l)] == doctest::Approx(b(l, 0) / b.sum()).epsilon(1e-13));
    }
  }
}

TEST_CASE("planted rank-2 structure gives the matching item the top score") {
  Matrix s(4, 2), a(3, 2), b(4, 2);
  s << 1, 1, 1, 1, 1, 1, 1, 1;
  a << 1, 0, 0, 1, 0, 1;
  b << 0, 1, 2, 0, 0, 1, 0.5, 0.5;
  const FittedModel model = model_of(s, {{"Dx", a}, {"Rx", b}});
  const CorrespondenceRow row = extract_correspondence(model, "t", "Dx", 0, "Rx", all_rows(4));
  CHECK(row.top(1) == std::vector<std::size_t>{1});
  CHECK(row.scores[0] == 0.0);
  CHECK(row.scores[2] == 0.0);
}

TEST_CASE("correspondence matches the slice-sum oracle on a small dense model") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = oracle::random_matrix(3, 2, rng), a = oracle::random_matrix(3, 2, rng),
                 b = oracle::random_matrix(3, 2, rng), c = oracle::random_matrix(3, 2, rng);
    const FittedModel model = model_of(s, {{"A", a}, {"B", b}, {"C", c}});
    const std::vector<std::size_t> pop{0, 2};
    for (Eigen::Index j = 0; j < 3; ++j) {
      const CorrespondenceRow row = extract_correspondence(model, "t", "A", static_cast<std::size_t>(j), "B", pop);
      const auto expected = slice_sum_oracle(s, a, b, c, pop, j);
      for (std::size_t l = 0; l < 3; ++l) CHECK(std::abs(row.scores[l] - expected[l]) < 1e-12);
      CHECK(std::accumulate(row.scores.begin(), row.scores.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("correspondence is invariant to rescaling the population rows") {
  std::mt19937_64 rng(3);
  const Matrix s = oracle::random_matrix(6, 3, rng), a = oracle::random_matrix(4, 3, rng),
               b = oracle::random_matrix(5, 3, rng);
  const std::vector<std::size_t> pop{1, 3, 4};
  const FittedModel m1 = model_of(s, {{"A", a}, {"B", b}});
  Matrix scaled = s;
  for (std::size_t p : pop) scaled.row(static_cast<Eigen::Index>(p)) *= 7.25;
  const FittedModel m2 = model_of(scaled, {{"A", a}, {"B", b}});
  const auto r1 = extract_correspondence(m1, "t", "A", 2, "B", pop);
  const auto r2 = extract_correspondence(m2, "t", "A", 2, "B", pop);
  for (std::size_t l = 0; l < 5; ++l) CHECK(r1.scores[l] == doctest::Approx(r2.scores[l]).epsilon(1e-13));
}

TEST_CASE("correspondence errors and the all-zero flag") {
  Matrix s = Matrix::Ones(2, 1), a(2, 1), b = Matrix::Ones(3, 1);
  a << 1, 0;
  const FittedModel model = model_of(s, {{"A", a}, {"B", b}});
  CHECK_THROWS_WITH_AS(extract_correspondence(model, "t", "A", 1, "B", std::vector<std::size_t>{}),
                       doctest::Contains("A_001"), ConfigError);
  CHECK_THROWS_AS(extract_correspondence(model, "t", "A", 0, "Z", all_rows(2)), ConfigError);
  const auto dead = extract_correspondence(model, "t", "A", 1, "B", all_rows(2));
  CHECK(dead.all_zero);
  for (double x : dead.scores) CHECK(x == 0.0);
}

TEST_CASE("default population uses observed presence") {
  Matrix v(4, 2);
  v << 1, 0, 0, 0, 3, 1, 0, 1;
  const ObservationMatrix obs = from_dense("A", synthetic_ids("p", 4), synthetic_ids("A_", 2), DataType::Integer, v);
  CHECK(default_population(obs, 0) == std::vector<std::size_t>{0, 2});
  CHECK(default_population(obs, 1) == std::vector<std::size_t>{2, 3});
}

TEST_CASE("top-k breaks ties by index") {
  CorrespondenceRow row;
  row.scores = {0.2, 0.3, 0.2, 0.3};
  CHECK(row.top(3) == std::vector<std::size_t>{1, 3, 0});
  CHECK(row.top(10).size() == 4);
}

TEST_CASE("phenotype extraction") {
  Matrix a(3, 2), b(3, 2);
  a << 3, 0, 1, 1, 0, 0;
  b << 0, 1, 0, 2, 0, 1;
  const FittedModel model = model_of(Matrix::Ones(2, 2), {{"Dx", a}, {"Rx", b}});
  const auto ph = extract_phenotypes(model);
  REQUIRE(ph.size() == 2);
  REQUIRE(ph[0].items[0].size() == 2);
  CHECK(ph[0].items[0][0].id == "Dx_000");
  CHECK(ph[0].items[0][0].weight == 0.75);
  CHECK(ph[0].items[0][1].weight == 0.25);
  CHECK(ph[0].items[1].empty());  // all-zero column
  REQUIRE(ph[1].items[0].size() == 1);
  CHECK(ph[1].items[0][0].weight == 1.0);
  CHECK(ph[1].items[1][0].id == "Rx_001");
  CHECK(ph[1].items[1][1].id == "Rx_000");  // tie with Rx_002, lower index first

  const std::string table = phenotypes_table(ph);
  CHECK(table.find("Phenotype 1\n  Dx: Dx_000 (0.750); Dx_001 (0.250)") != std::string::npos);
  CHECK(table.find("Phenotype 2") != std::string::npos);
  CHECK(phenotypes_json(ph).find("\"Rx_001\"") != std::string::npos);
}

TEST_CASE("phenotype weights reassemble the columns up to dropped mass") {
  std::mt19937_64 rng(4);
  Matrix a = oracle::random_matrix(30, 4, rng, 0.0, 1.0);
  a(0, 0) = 1e-7;
  const double thr = 1e-3;
  const FittedModel model = model_of(Matrix::Ones(2, 4), {{"A", a}});
  const auto ph = extract_phenotypes(model, thr);
  for (std::size_t r = 0; r < 4; ++r) {
    const auto col = a.col(static_cast<Eigen::Index>(r));
    Matrix rebuilt = Matrix::Zero(30, 1);
    double sum = 0.0;
    for (const auto& item : ph[r].items[0]) {
      CHECK(item.weight > 0.0);
      sum += item.weight;
      rebuilt(static_cast<Eigen::Index>(item.index), 0) = item.weight * col.sum();
    }
    CHECK(sum <= 1.0 + 1e-12);
    CHECK((rebuilt - col).cwiseAbs().sum() <= thr * 30 * col.sum());
  }
}

TEST_CASE("cosine similarity metric") {
  const std::vector<FactorMatrix> orth{FactorMatrix(Matrix::Identity(3, 3))};
  CHECK(cosine_similarity_metric(orth) == 0.0);
  const std::vector<FactorMatrix> same{FactorMatrix(Matrix::Ones(4, 2))};
  CHECK(cosine_similarity_metric(same) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cosine_similarity_metric(same, PairNormalization::UnorderedPairs) == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> raw{oracle::random_matrix(5, 4, rng, 0.0, 1.0), oracle::random_matrix(7, 4, rng, 0.0, 1.0)};
    std::vector<FactorMatrix> fs{FactorMatrix(raw[0]), FactorMatrix(raw[1])};
    const double v = cosine_similarity_metric(fs);
    CHECK(std::abs(v - oracle::cosine_metric(raw)) < 1e-12);
    CHECK(v >= 0.0);
    CHECK(v <= 0.5);
  }
}

TEST_CASE("jaccard at k") {
  Matrix a(4, 2);
  a << 1, 1, 0.5, 0.5, 0, 0, 0, 0;
  const auto same = extract_phenotypes(model_of(Matrix::Ones(2, 2), {{"A", a}}));
  CHECK(jaccard_at_k(same, 10) == doctest::Approx(0.5).epsilon(1e-15));

  Matrix d(4, 2);
  d << 1, 0, 1, 0, 0, 1, 0, 1;
  CHECK(jaccard_at_k(extract_phenotypes(model_of(Matrix::Ones(2, 2), {{"A", d}})), 10) == 0.0);

  // Random factors against explicit top-K sets.
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 3;
    const Matrix x = oracle::random_matrix(8, 3, rng, 0.01, 1.0), y = oracle::random_matrix(6, 3, rng, 0.01, 1.0);
    const auto ph = extract_phenotypes(model_of(Matrix::Ones(2, 3), {{"X", x}, {"Y", y}}));
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> q(3);
    for (std::size_t r = 0; r < 3; ++r) {
      std::size_t mi = 0;
      for (const Matrix* m : {&x, &y}) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(m->rows()));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t s) {
          return (*m)(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r)) >
                 (*m)(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r));
        });
        for (std::size_t i = 0; i < k; ++i) q[r].insert({mi, idx[i]});
        ++mi;
      }
    }
    const double j = jaccard_at_k(ph, k);
    CHECK(std::abs(j - oracle::jaccard_metric(q)) < 1e-12);
    CHECK(j <= 0.5);
    auto reversed = ph;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(jaccard_at_k(reversed, k) == doctest::Approx(j).epsilon(1e-14));
  }
}

TEST_CASE("sparsity") {
  const std::vector<FactorMatrix> zero{FactorMatrix(3, 2)};
  CHECK(sparsity(zero) == 0.0);
  Matrix half(2, 2);
  half << 1, 0, 0, 2;
  const std::vector<FactorMatrix> h{FactorMatrix(half)};
  CHECK(sparsity(h) == 0.5);

  std::mt19937_64 rng(7);
  std::bernoulli_distribution keep(0.3);
  std::vector<Matrix> raw{oracle::random_matrix(9, 4, rng), oracle::random_matrix(5, 4, rng)};
  for (auto& m : raw) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (!keep(rng)) m.data()[i] = 0.0;
    }
  }
  const std::vector<FactorMatrix> fs{FactorMatrix(raw[0]), FactorMatrix(raw[1])};
  CHECK(sparsity(fs) == oracle::sparsity_count(raw));
}

TEST_CASE("meaningfulness score") {
  const std::vector<int> twos(4, 2);
  const std::vector<double> diabetes{0.88, 0.05, 0.01, 0.01};
  CHECK(*meaningfulness_score(diabetes, twos) == doctest::Approx(2.0).epsilon(1e-15));
  const std::vector<double> even{0.5, 0.5};
  const std::vector<int> split{2, 0};
  CHECK(*meaningfulness_score(even, split) == 1.0);
  const std::vector<double> zeros{0.0, 0.0};
  CHECK_FALSE(meaningfulness_score(zeros, split).has_value());

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> z(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix c = oracle::random_matrix(1, 10, rng, 0.0, 1.0);
    std::vector<double> scores(c.data(), c.data() + 10);
    std::vector<int> ann(10);
    for (int& x : ann) x = z(rng);
    const double v = *meaningfulness_score(scores, ann);
    CHECK(std::abs(v - oracle::meaningfulness(scores, ann)) < 1e-12);
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
    const auto low = std::find_if(ann.begin(), ann.end(), [](int x) { return x < 2; });
    if (low != ann.end()) {
      ++*low;
      CHECK(*meaningfulness_score(scores, ann) >= v);
    }
  }
}

TEST_CASE("meaningfulness of a row requires annotations for the top items") {
  CorrespondenceRow row;
  row.target_item_ids = {"insulin", "metformin", "aspirin"};
  row.scores = {0.7, 0.2, 0.1};
  const std::map<std::string, int> partial{{"insulin", 2}};
  CHECK_THROWS_WITH_AS(meaningfulness_score(row, partial, 2), doctest::Contains("metformin"), ConfigError);
  const std::map<std::string, int> full{{"insulin", 2}, {"metformin", 1}};
  CHECK(*meaningfulness_score(row, full, 2) == doctest::Approx((0.7 * 2 + 0.2) / 0.9).epsilon(1e-14));
}

TEST_CASE("annotation csv and reports") {
  const auto dir = std::filesystem::temp_directory_path() / "chitf_test_analysis";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ann.csv";
  std::ofstream(path) << "anchor,target,score\ndiabetes,insulin,2\ndiabetes,aspirin,0\n";
  const Annotations ann = load_annotations(path);
  CHECK(ann.at("diabetes").at("insulin") == 2);
  CHECK(ann.at("diabetes").at("aspirin") == 0);
  std::filesystem::remove_all(dir);

  Matrix a(2, 2);
  a << 1, 0, 0, 1;
  const FittedModel model = model_of(Matrix::Ones(3, 2), {{"A", a}, {"B", a}});
  const MetricsReport m = compute_metrics(model, 10);
  CHECK(m.sparsity == 0.5);
  CHECK(m.cosine_similarity == 0.0);
  CHECK(m.jaccard_at_k == 0.0);
  CHECK(metrics_json(m).find("\"sparsity\"") != std::string::npos);

  const auto row = extract_correspondence(model, "t", "A", 0, "B", all_rows(3));
  const std::string csv = correspondence_csv({row}, 1);
  CHECK(csv.find("A_000") != std::string::npos);
  CHECK(csv.find("B_000") != std::string::npos);
}
