#include <doctest.h>

#include <cmath>
#include <fstream>

#include "idr/checkpoint.hpp"
#include "idr/classifier.hpp"
#include "support/gradcheck.hpp"
#include "support/models.hpp"

using namespace idr;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("build_input lengths") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 4;
  opts.embedding_dim = 6;
  auto fx = testing::make_fixture(opts);

  SUBCASE("bilstm only with hidden 250") {
    auto cfg = testing::small_config(ModelKind::bilstm, opts);
    cfg.lstm_hidden = 250;
    RelationModel m(cfg, fx.resources, fx.senses);
    Rng rng(1);
    m.initialize(rng);
    CHECK(m.plan().input_dimension() == 1000);
    CHECK(m.build_input(fx.corpus[0]).size() == 1000);
  }
  SUBCASE("bilstm plus 4096-dimensional pretrained vectors") {
    auto store = std::make_shared<const SentenceVectorStore>(testing::make_fake_store(fx.corpus, 4096, 3));
    ModelResources res = fx.resources;
    res.pretrained = std::make_shared<const StoreSource>(store);
    auto cfg = testing::small_config(ModelKind::combined, opts);
    cfg.lstm_hidden = 250;
    cfg.pretrained_dim = 4096;
    RelationModel m(cfg, res, fx.senses);
    CHECK(m.plan().input_dimension() == 9192);
    CHECK(m.build_input(fx.corpus[1]).size() == 9192);
    CHECK(m.head().hidden_widths() == std::vector<std::size_t>{32, 32, 32});
  }
  SUBCASE("pretrained only") {
    auto cfg = testing::small_config(ModelKind::pretrained, opts);
    RelationModel m(cfg, fx.resources, fx.senses);
    CHECK(m.build_input(fx.corpus[2]).size() == 2 * opts.pretrained_dim);
  }
}

TEST_CASE("input blocks are laid out in the documented order") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 8;
  opts.clusters = true;
  auto fx = testing::make_fixture(opts);
  auto cfg = testing::small_config(ModelKind::combined, opts);
  cfg.word_pairs = true;
  cfg.word_pair_dim = 50;
  RelationModel m(cfg, fx.resources, fx.senses);
  Rng rng(2);
  m.initialize(rng);
  const auto& r = fx.corpus[5];
  const auto x = m.build_input(r);
  REQUIRE(x.size() == 16 + 16 + 24 + 24 + 50);

  const auto e1 = m.encoder().encode(embed_tokens_as<float>(r.arg1_tokens, *fx.resources.embeddings));
  const auto e2 = m.encoder().encode(embed_tokens_as<float>(r.arg2_tokens, *fx.resources.embeddings));
  const auto p1 = fx.resources.pretrained->vector_for(r, ArgSlot::arg1);
  const auto p2 = fx.resources.pretrained->vector_for(r, ArgSlot::arg2);
  std::vector<float> expected;
  for (const auto* block : {&e1, &e2, &p1, &p2}) expected.insert(expected.end(), block->begin(), block->end());
  std::vector<float> pairs(50, 0.0f);
  for (auto i : word_pair_features(r.arg1_tokens, r.arg2_tokens, *fx.resources.clusters, 50).active_indices)
    pairs[i] = 1.0f;
  expected.insert(expected.end(), pairs.begin(), pairs.end());
  CHECK(x == expected);
}

TEST_CASE("build_input errors") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 4;
  auto fx = testing::make_fixture(opts);
  auto cfg = testing::small_config(ModelKind::pretrained, opts);
  RelationModel m(cfg, fx.resources, fx.senses);
  auto stranger = fx.corpus[0];
  stranger.id = "not-exported";
  CHECK_THROWS_AS(m.build_input(stranger), missing_id_error);

  auto drift = cfg;
  drift.pretrained_dim = 25;
  CHECK_THROWS_AS(RelationModel(drift, fx.resources, fx.senses), shape_error);

  auto no_pairs = cfg;
  no_pairs.word_pairs = true;
  CHECK_THROWS_AS(RelationModel(no_pairs, fx.resources, fx.senses), invalid_argument_error);
}

TEST_CASE("head depth follows the model kind") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 4;
  auto fx = testing::make_fixture(opts);
  CHECK(RelationModel(testing::small_config(ModelKind::bilstm, opts), fx.resources, fx.senses)
            .head()
            .layer_count() == 3);
  CHECK(RelationModel(testing::small_config(ModelKind::pretrained, opts), fx.resources, fx.senses)
            .head()
            .layer_count() == 4);
  CHECK(RelationModel(testing::small_config(ModelKind::combined, opts), fx.resources, fx.senses)
            .head()
            .layer_count() == 4);

  auto cfg = testing::small_config(ModelKind::bilstm, opts);
  cfg.head_layers = 4;
  CHECK_THROWS_AS(cfg.validate(), invalid_argument_error);
  cfg.strict_head_rule = false;
  for (std::size_t n : kAllowedHeadLayers) {
    cfg.head_layers = n;
    CHECK(RelationModel(cfg, fx.resources, fx.senses).head().layer_count() == n);
  }
  for (std::size_t n : {1u, 6u, 8u, 11u}) {
    cfg.head_layers = n;
    CHECK_THROWS_AS(cfg.validate(), invalid_argument_error);
  }
  CHECK_THROWS_AS(FfnHead<float>(4, {4, 4, 4, 4, 4}, 2), invalid_argument_error);
}

TEST_CASE("forward contract") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 12;
  auto fx = testing::make_fixture(opts);
  RelationModel m(testing::small_config(ModelKind::combined, opts), fx.resources, fx.senses);

  // Uninitialized parameters are all zero: zero logits, prediction index 0.
  auto zero = m.forward(fx.corpus[3], false, nullptr);
  CHECK(zero == std::vector<float>(fx.senses.size(), 0.0f));
  auto sm = softmax<float>(zero);
  for (float p : sm) CHECK(p == doctest::Approx(1.0 / fx.senses.size()));
  CHECK(m.predict(fx.corpus[3]) == 0);

  Rng rng(5);
  m.initialize(rng);
  for (const auto& r : fx.corpus) {
    auto a = m.forward(r, false, nullptr);
    Rng other(999);
    auto b = m.forward(r, false, &other);
    CHECK(a.size() == fx.senses.size());
    CHECK(a == b);
    for (float v : a) CHECK(std::isfinite(v));
  }
  Rng d1(7), d2(8);
  CHECK(m.forward(fx.corpus[0], true, &d1) != m.forward(fx.corpus[0], true, &d2));
}

TEST_CASE("predict uses the lowest index on ties and is monotone-invariant") {
  const std::vector<float> l{0.1f, 2.0f, -1.0f};
  CHECK(argmax_lowest<float>(l) == 1);
  CHECK(argmax_lowest<float>(std::vector<float>{0, 0, 0}) == 0);
  CHECK(argmax_lowest<float>(std::vector<float>{1, 3, 3}) == 1);
  SenseInventory inv({"A", "B", "C"});
  CHECK(inv.label(argmax_lowest<float>(l)) == "B");

  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(5), e(5), c(5);
    for (auto& x : v) x = rng.uniform(-3, 3);
    for (std::size_t i = 0; i < 5; ++i) e[i] = std::exp(v[i]), c[i] = v[i] * v[i] * v[i] + 2;
    CHECK(argmax_lowest<double>(v) == argmax_lowest<double>(e));
    CHECK(argmax_lowest<double>(v) == argmax_lowest<double>(c));
  }
}

TEST_CASE("relation model gradients match finite differences") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 6;
  opts.corpus.vocab = 12;
  opts.embedding_dim = 3;
  opts.pretrained_dim = 4;
  opts.corpus.min_len = 1;
  opts.corpus.max_len = 4;
  opts.clusters = true;
  auto fx = testing::make_fixture(opts);
  auto cfg = testing::small_config(ModelKind::combined, opts);
  cfg.lstm_hidden = 3;
  cfg.hidden_width_cap = 5;
  cfg.word_pairs = true;
  cfg.word_pair_dim = 7;
  cfg.dropout = 0.0f;
  BasicRelationModel<long double> m(cfg, fx.resources, fx.senses);
  Rng rng(4);
  m.initialize(rng);
  std::vector<Tensor<long double>*> params;
  for (auto& [name, p] : m.named_parameters()) {
    if (p->rank() == 1)
      for (auto& v : p->values()) v = rng.uniform(-0.3, 0.3);
    params.push_back(p);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = fx.corpus[i];
    const std::size_t gold = fx.senses.index_of(r.senses[0]);
    m.zero_grad();
    BasicRelationModel<long double>::Trace tr;
    auto res = softmax_nll<long double>(m.forward(r, true, nullptr, &tr), gold);
    m.backward(tr, res.grad);
    const auto analytic = testing::flatten_grads(params);
    const auto theta = testing::flatten(params);
    std::function<long double(std::span<const long double>)> f =
        [&](std::span<const long double> t) {
          testing::unflatten(t, params);
          return softmax_nll<long double>(m.forward(r, false, nullptr), gold).loss;
        };
    CHECK(finite_difference_check<long double>(f, theta, analytic, 1e-5L) < 1e-4L);
    testing::unflatten<long double>(theta, params);
  }
}

TEST_CASE("freezing the encoder removes it from the trainable set") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 4;
  auto fx = testing::make_fixture(opts);
  auto cfg = testing::small_config(ModelKind::combined, opts);
  RelationModel m(cfg, fx.resources, fx.senses);
  const auto all = m.trainable_parameters().size();
  m.set_freeze_encoder(true);
  CHECK(m.trainable_parameters().size() == all - m.encoder().parameters().size());
  CHECK(m.named_parameters().size() == all);
}

TEST_CASE("checkpoint round-trip") {
  testing::FixtureOptions opts;
  opts.corpus.instances = 10;
  opts.clusters = true;
  auto fx = testing::make_fixture(opts);
  auto cfg = testing::small_config(ModelKind::combined, opts);
  cfg.word_pairs = true;
  cfg.word_pair_dim = 64;
  cfg.pooling = Pooling::max;
  RelationModel m(cfg, fx.resources, fx.senses);
  Rng rng(6);
  m.initialize(rng);
  auto ck = make_checkpoint(m, {{"glove", "/x/g.txt"}, {"seed", "6"}});
  auto dir = testing::temp_dir("ckpt");
  save_checkpoint(ck, dir / "a.bin");
  auto back = load_checkpoint(dir / "a.bin");
  CHECK(back == ck);
  CHECK(back.config == cfg);
  save_checkpoint(back, dir / "b.bin");
  CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
  CHECK(slurp(dir / "a.bin").substr(0, 8) == std::string("IDRCKPT\0", 8));

  RelationModel fresh(back.config, fx.resources, back.senses);
  restore_parameters(fresh, back);
  for (const auto& r : fx.corpus) CHECK(fresh.forward(r, false, nullptr) == m.forward(r, false, nullptr));

  const auto bytes = slurp(dir / "a.bin");
  spit(dir / "magic.bin", "XDRCKPT" + bytes.substr(7));
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.bin"), format_error);
  auto ver = bytes;
  ver[8] = 9;
  spit(dir / "ver.bin", ver);
  CHECK_THROWS_AS(load_checkpoint(dir / "ver.bin"), format_error);
  spit(dir / "trunc.bin", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.bin"), format_error);
  spit(dir / "tail.bin", bytes + "x");
  CHECK_THROWS_AS(load_checkpoint(dir / "tail.bin"), format_error);

  auto other_cfg = cfg;
  other_cfg.lstm_hidden = 9;
  RelationModel other(other_cfg, fx.resources, fx.senses);
  CHECK_THROWS_AS(restore_parameters(other, back), mismatch_error);
}

}  // TEST_SUITE
