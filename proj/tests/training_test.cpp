#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "support.hpp"

namespace srl {
namespace {

using test::fixture;

TrainConfig toy_train_config() {
  TrainConfig cfg;
  cfg.model = test::tiny_config();
  cfg.batch_tokens = 200;
  cfg.max_epochs = 3;
  cfg.seed = 7;
  return cfg;
}

std::vector<PassUnit> units_of_size(std::vector<std::size_t> sizes) {
  std::vector<PassUnit> out;
  for (std::size_t n : sizes) out.push_back({0, 1, n, {}});
  return out;
}

std::string checkpoint_bytes(const Checkpoint& c) {
  std::ostringstream out;
  save_checkpoint(c, out);
  return out.str();
}

TEST(Batches, GreedyFill) {
  const auto batches = make_batches(units_of_size({10, 10, 10}), 25, 3);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].tokens, 20u);
  EXPECT_EQ(batches[1].tokens, 10u);
}

TEST(Batches, LargeBudgetGivesOneBatch) {
  const auto batches = make_batches(units_of_size({4, 9, 2, 7}), 5000, 3);
  ASSERT_EQ(batches.size(), 1u);
  EXPECT_EQ(batches[0].tokens, 22u);
  EXPECT_EQ(batches[0].units.size(), 4u);
}

TEST(Batches, OversizedPassFormsItsOwnBatch) {
  const auto units = units_of_size({3, 40, 3, 3});
  const auto batches = make_batches(units, 10, 1);
  std::size_t total = 0;
  for (const Batch& b : batches) {
    total += b.units.size();
    if (b.tokens > 10) {
      ASSERT_EQ(b.units.size(), 1u);
      EXPECT_EQ(units[b.units[0]].tokens, 40u);
    }
  }
  EXPECT_EQ(total, 4u);
  EXPECT_THROW(make_batches(units, 0, 1), ArgumentError);
}

TEST(Batches, SeedDeterminesOrder) {
  std::vector<std::size_t> sizes(30);
  for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i] = 1 + i % 7;
  const auto units = units_of_size(sizes);
  auto flatten = [](const std::vector<Batch>& bs) {
    std::vector<std::size_t> out;
    for (const Batch& b : bs) out.insert(out.end(), b.units.begin(), b.units.end());
    return out;
  };
  EXPECT_EQ(flatten(make_batches(units, 12, 5)), flatten(make_batches(units, 12, 5)));
  EXPECT_NE(flatten(make_batches(units, 12, 5)), flatten(make_batches(units, 12, 6)));
}

TEST(Units, PerPredicatePasses) {
  const Corpus c = fixture("gene.conll09");
  const LabelSpace labels = build_label_space(c);
  const auto u09 = make_units(c, TaskMode::kConll2009, labels);
  ASSERT_EQ(u09.size(), 2u);
  EXPECT_EQ(u09[0].indicator, 5);
  EXPECT_EQ(u09[0].tokens, 11u);
  EXPECT_EQ(u09[0].samples.size(), 12u);
  EXPECT_EQ(u09[0].samples[0].kind, PairKind::kSense);

  const auto u08 = make_units(c, TaskMode::kConll2008, labels);
  ASSERT_EQ(u08.size(), 3u);
  EXPECT_EQ(u08[0].indicator, 0);
  EXPECT_EQ(u08[0].samples.size(), 11u);
  EXPECT_EQ(u08[1].samples.size(), 11u);
  EXPECT_EQ(u08[2].indicator, 9);

  std::size_t pairs = 0;
  for (const PassUnit& u : u09) pairs += u.samples.size();
  EXPECT_EQ(pairs, decompose(c[0], TaskMode::kConll2009, labels).size());
}

TEST(Units, SentencesWithoutPredicates) {
  const Corpus c = fixture("mixed.conll09");
  const LabelSpace labels = build_label_space(c);
  EXPECT_EQ(make_units(c, TaskMode::kConll2009, labels).size(), 3u);
  EXPECT_EQ(make_units(c, TaskMode::kConll2008, labels).size(), 6u);
}

TEST(BatchLoss, ZeroHeadGivesLogLabelCount) {
  const Corpus c = test::toy_corpus(10, 3);
  auto model = test::make_model(c, test::tiny_config());
  model->params().get("biaffine.b").value.fill(0.0);
  const auto units = make_units(c, TaskMode::kConll2009, model->labels());
  std::vector<EncodedSentence> inputs;
  for (const Sentence& s : c) inputs.push_back(model->encode_inputs(s));
  Rng rng(1);
  for (const Batch& b : make_batches(units, 40, 2)) {
    Tape tape;
    const double loss = batch_loss(tape, *model, inputs, units, b, Mode::kTrain, rng).value()[0];
    EXPECT_NEAR(loss, std::log(static_cast<double>(model->labels().size())), 1e-12);
  }
}

TEST(BatchLoss, SaturatedCorrectScoresGiveZero) {
  // Every pair of this sentence is None except a single A0 and the sense.
  const Corpus c = fixture("two_token.conll09");
  auto model = test::make_model(c, test::tiny_config());
  const auto units = make_units(c, TaskMode::kConll2009, model->labels());
  ASSERT_EQ(units.size(), 1u);
  std::vector<EncodedSentence> inputs = {model->encode_inputs(c[0])};
  Tensor& b = model->params().get("biaffine.b").value;
  b.fill(-1000.0);
  b[LabelSpace::kNone] = 1000.0;
  Tape tape;
  Rng rng(1);
  Batch batch{{0}, 2};
  const double mixed = batch_loss(tape, *model, inputs, units, batch, Mode::kInfer, rng).value()[0];
  EXPECT_GT(mixed, 100.0);
  PassUnit only_none = units[0];
  std::erase_if(only_none.samples, [](const WordPairSample& p) { return p.label != 0; });
  ASSERT_FALSE(only_none.samples.empty());
  Tape t2;
  const double saturated =
      batch_loss(t2, *model, inputs, {only_none}, batch, Mode::kInfer, rng).value()[0];
  EXPECT_GE(saturated, 0.0);
  EXPECT_LT(saturated, 1e-12);
}

TEST(Train, LossDecreasesOverFirstTenSteps) {
  const Corpus c = test::toy_corpus(20, 4);
  TrainConfig cfg = toy_train_config();
  cfg.model.word_dropout = 0.0;
  cfg.model.recurrent_keep = 1.0;
  cfg.model.proj_keep = 1.0;
  cfg.batch_tokens = 100000;
  cfg.max_epochs = 10;
  cfg.eval_every = 100;
  std::vector<double> losses;
  TrainHooks hooks;
  hooks.on_step = [&](const StepInfo& s) { losses.push_back(s.loss); };
  train(c, {}, cfg, nullptr, hooks);
  ASSERT_EQ(losses.size(), 10u);
  for (std::size_t i = 1; i < losses.size(); ++i) EXPECT_LT(losses[i], losses[i - 1]) << i;
}

TEST(Train, AppliedRateFollowsSchedule) {
  const Corpus c = test::toy_corpus(12, 5);
  TrainConfig cfg = toy_train_config();
  cfg.batch_tokens = 30;
  cfg.adam.anneal_period = 4;
  std::vector<StepInfo> steps;
  TrainHooks hooks;
  hooks.on_step = [&](const StepInfo& s) { steps.push_back(s); };
  const TrainResult r = train(c, {}, cfg, nullptr, hooks);
  ASSERT_GT(steps.size(), 8u);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    EXPECT_EQ(steps[i].step, i);
    EXPECT_EQ(steps[i].learning_rate, learning_rate(cfg.adam, i));
  }
  EXPECT_EQ(r.epochs.back().step, steps.size());
  EXPECT_EQ(r.epochs.back().learning_rate, steps.back().learning_rate);
}

TEST(Train, GradientNormIsClipped) {
  const Corpus c = test::toy_corpus(6, 5);
  TrainConfig cfg = toy_train_config();
  cfg.clip_norm = 1e-3;
  cfg.max_epochs = 1;
  TrainHooks hooks;
  std::size_t steps = 0;
  hooks.on_step = [&](const StepInfo& s) {
    ++steps;
    EXPECT_GT(s.grad_norm, 1e-3);
  };
  train(c, {}, cfg, nullptr, hooks);
  EXPECT_GT(steps, 0u);
}

TEST(Train, PatienceStopsAtFirstNonImprovingEvaluation) {
  const Corpus c = test::toy_corpus(8, 9);
  TrainConfig cfg = toy_train_config();
  cfg.patience = 1;
  cfg.max_epochs = 40;
  const TrainResult r = train(c, c, cfg);
  double best = -1.0;
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    ASSERT_TRUE(r.epochs[i].dev);
    const double f1 = r.epochs[i].dev->f1();
    if (i + 1 < r.epochs.size()) {
      EXPECT_GT(f1, best) << "epoch " << i + 1;
    } else if (r.epochs.size() < cfg.max_epochs) {
      EXPECT_LE(f1, best);
    }
    best = std::max(best, f1);
  }
  EXPECT_EQ(r.best.best_dev_f1, best);
  EXPECT_EQ(r.epochs[r.best_epoch - 1].dev->f1(), best);
}

TEST(Train, BestCheckpointNeverWorseThanAnyEvaluation) {
  const Corpus c = test::toy_corpus(8, 10);
  TrainConfig cfg = toy_train_config();
  cfg.max_epochs = 8;
  cfg.eval_every = 2;
  cfg.patience = 2;
  const TrainResult r = train(c, c, cfg);
  double best = 0.0;
  std::size_t evaluated = 0;
  for (const EpochRecord& e : r.epochs) {
    if (!e.dev) continue;
    ++evaluated;
    best = std::max(best, e.dev->f1());
    EXPECT_EQ(e.epoch % 2, 0u);
  }
  EXPECT_GT(evaluated, 0u);
  EXPECT_EQ(r.best.best_dev_f1, best);
  // The restored weights reproduce the selected F1.
  const EvalReport again =
      score_semantic(c, predict_corpus(*r.best.model, c, TaskMode::kConll2009), TaskMode::kConll2009);
  EXPECT_EQ(again.semantic.f1(), best);
}

TEST(Train, SameSeedIsBitIdentical) {
  const Corpus c = test::toy_corpus(10, 12);
  TrainConfig cfg = toy_train_config();
  const TrainResult a = train(c, c, cfg);
  const TrainResult b = train(c, c, cfg);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(checkpoint_bytes(a.best), checkpoint_bytes(b.best));
  cfg.seed = 8;
  EXPECT_NE(checkpoint_bytes(train(c, c, cfg).best), checkpoint_bytes(a.best));
}

TEST(Train, FrozenParametersStayPut) {
  const Corpus c = test::toy_corpus(6, 13);
  TrainConfig cfg = toy_train_config();
  cfg.frozen = {"biaffine.W", "biaffine.U"};
  const TrainResult r = train(c, {}, cfg);
  for (const char* name : {"biaffine.W", "biaffine.U"}) {
    for (double v : r.best.model->params().get(name).value.data()) EXPECT_EQ(v, 0.0);
  }
  auto fresh = test::make_model(c, cfg.model, cfg.seed);
  EXPECT_NE(r.best.model->params().get("biaffine.b").value.data()[0],
            fresh->params().get("biaffine.b").value.data()[0]);
  cfg.frozen = {"no.such.param"};
  EXPECT_THROW(train(c, {}, cfg), Error);
}

TEST(Train, NonFiniteLossAborts) {
  const Corpus c = test::toy_corpus(4, 14);
  TrainConfig cfg = toy_train_config();
  cfg.model.use_pretrained = true;
  cfg.model.pretrained_dim = 2;
  EmbeddingTable table;
  table.dim = 2;
  table.oov = {0.0, 0.0};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Sentence& s : c) {
    for (const Token& t : s.tokens) table.vectors[lowercase(t.form)] = {nan, 1.0};
  }
  try {
    train(c, {}, cfg, &table);
    FAIL() << "training finished";
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step 0"), std::string::npos) << what;
    EXPECT_NE(what.find("batch 0"), std::string::npos) << what;
  }
}

TEST(Train, EmbeddingWidthMismatchIsConfigError) {
  const Corpus c = test::toy_corpus(4, 14);
  TrainConfig cfg = toy_train_config();
  cfg.model.use_pretrained = true;
  cfg.model.pretrained_dim = 3;
  EmbeddingTable table;
  table.dim = 2;
  EXPECT_THROW(train(c, {}, cfg, &table), ConfigError);
}

TEST(Train, RejectsBadConfigAndEmptyData) {
  const Corpus c = test::toy_corpus(4, 14);
  TrainConfig cfg = toy_train_config();
  cfg.batch_tokens = 0;
  EXPECT_THROW(train(c, {}, cfg), ConfigError);
  cfg = toy_train_config();
  cfg.patience = 0;
  EXPECT_THROW(train(c, {}, cfg), ConfigError);
  EXPECT_THROW(train({}, {}, toy_train_config()), DataError);
}

TEST(Train, LogRecordsCarryEveryField) {
  const Corpus c = test::toy_corpus(6, 15);
  TrainConfig cfg = toy_train_config();
  cfg.max_epochs = 2;
  std::vector<std::string> seen;
  TrainHooks hooks;
  hooks.log = [&](const std::string& line) { seen.push_back(line); };
  const TrainResult r = train(c, c, cfg, nullptr, hooks);
  EXPECT_EQ(seen, r.log);
  ASSERT_EQ(r.log.size(), 3u);
  for (const char* field : {"epoch 1\t", "step ", "loss ", "lr ", "dev_p ", "dev_r ", "dev_f1 "}) {
    EXPECT_NE(r.log[0].find(field), std::string::npos) << field;
  }
  EXPECT_EQ(r.log[2].rfind("best epoch ", 0), 0u);
}

TEST(EpochRecord, Formatting) {
  EpochRecord r{3, 120, 0.5, 0.002, std::nullopt};
  EXPECT_EQ(format_epoch_record(r), "epoch 3\tstep 120\tloss 0.500000\tlr 0.002");
  r.dev = Counts{2, 3, 4};
  EXPECT_EQ(format_epoch_record(r),
            "epoch 3\tstep 120\tloss 0.500000\tlr 0.002\tdev_p 66.67\tdev_r 50.00\tdev_f1 57.14");
}

TEST(PairAccuracy, FractionOfCorrectPairs) {
  const Corpus c = fixture("two_token.conll09");
  auto model = test::make_model(c, test::tiny_config());
  Tensor& b = model->params().get("biaffine.b").value;
  b.fill(0.0);
  b[LabelSpace::kNone] = 1.0;
  // Pairs: sense(sleeps), (2,1) A0, (2,2) None. Only the last decodes
  // correctly.
  EXPECT_NEAR(pair_accuracy(*model, c, TaskMode::kConll2009), 1.0 / 3.0, 1e-15);
  b[*model->labels().sense_id("01")] = 2.0;
  EXPECT_NEAR(pair_accuracy(*model, c, TaskMode::kConll2009), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(pair_accuracy(*model, {}, TaskMode::kConll2009), 1.0);
}

}  // namespace
}  // namespace srl
