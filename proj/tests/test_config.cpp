#include <gtest/gtest.h>

#include <cstdlib>

#include "graphdiff/config.hpp"
#include "graphdiff/train.hpp"

using namespace graphdiff;

TEST(Config, ParseBasics) {
  const auto c = Config::from_string(
      "# comment\n"
      "train.lr = 0.001\n"
      "model.heads = 2,4\n"
      "dataset.kind = grid   \n"
      "\n"
      "train.self_conditioning = false\n");
  EXPECT_DOUBLE_EQ(c.get_double("train.lr", 0.0), 0.001);
  EXPECT_EQ(c.get_int_list("model.heads", {}), (std::vector<int>{2, 4}));
  EXPECT_EQ(c.get_str("dataset.kind", ""), "grid");
  EXPECT_FALSE(c.get_bool("train.self_conditioning", true));
  EXPECT_EQ(c.get_int("train.epochs", 7), 7);
}

TEST(Config, MalformedLineReportsLocation) {
  try {
    Config::from_string("a = 1\nbad line\n", "test.cfg");
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::parse);
    EXPECT_NE(std::string(e.what()).find("test.cfg:2"), std::string::npos);
  }
}

TEST(Config, BadNumberIsConfigError) {
  const auto c = Config::from_string("train.lr = fast\n");
  EXPECT_THROW(c.get_double("train.lr", 0.0), Error);
}

TEST(Config, EnvOverride) {
  setenv("GRAPHDIFF_EDM__SIGMA_MAX", "42.5", 1);
  setenv("GRAPHDIFF_TRAIN__EPOCHS", "3", 1);
  auto c = Config::from_string("edm.sigma_max = 80\n");
  c.apply_env_overrides();
  EXPECT_DOUBLE_EQ(c.get_double("edm.sigma_max", 0.0), 42.5);
  EXPECT_EQ(c.get_int("train.epochs", 0), 3);
  unsetenv("GRAPHDIFF_EDM__SIGMA_MAX");
  unsetenv("GRAPHDIFF_TRAIN__EPOCHS");
}

TEST(Config, UnknownKeysRejectedByTrainConfig) {
  const auto c = Config::from_string("train.lrr = 0.001\n");
  EXPECT_THROW(train_config_from(c), Error);
}

TEST(TrainConfigText, RoundTripsThroughParser) {
  TrainConfig t;
  t.epochs = 12;
  t.lr = 3.5e-4;
  t.ema_decay = 0.97;
  t.seed = 99;
  t.dataset.kind = "community-small";
  t.dataset.seed = 7;
  t.model.token_dim = 16;
  t.model.ff_dim = 64;
  t.model.heads = {2, 4};
  t.model.down_blocks = {1, 2};
  t.model.up_blocks = {1, 2};
  t.edm.steps = 48;
  t.edm.s_churn = 13.5;

  const auto back = train_config_from(Config::from_string(to_config_text(t)));
  EXPECT_EQ(back.epochs, t.epochs);
  EXPECT_DOUBLE_EQ(back.lr, t.lr);
  EXPECT_DOUBLE_EQ(back.ema_decay, t.ema_decay);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.dataset.kind, t.dataset.kind);
  EXPECT_EQ(back.model.heads, t.model.heads);
  EXPECT_EQ(back.model.down_blocks, t.model.down_blocks);
  EXPECT_EQ(back.edm.steps, t.edm.steps);
  EXPECT_DOUBLE_EQ(back.edm.s_churn, t.edm.s_churn);
}

TEST(TrainConfigText, AttributedConfigSetsChannels) {
  TrainConfig t;
  t.attributed = true;
  t.encoding.kind = EncodingKind::one_hot;
  t.encoding.num_node_types = 4;
  t.encoding.num_edge_types = 4;
  const auto back = train_config_from(Config::from_string(to_config_text(t)));
  EXPECT_EQ(back.model.edge_channels, 4);
  EXPECT_EQ(back.model.node_channels, 4);
}

TEST(TrainConfigValidate, RejectsBadRanges) {
  TrainConfig t;
  t.ema_decay = 1.0;
  EXPECT_THROW(t.validate(), Error);
  t = TrainConfig{};
  t.lr = 0.0;
  EXPECT_THROW(t.validate(), Error);
}
