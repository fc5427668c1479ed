#include <cstring>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ieqa/defvalue.hpp"
#include "ieqa/parallel.hpp"
#include "ieqa/prompt_embed.hpp"
#include "ieqa/rng.hpp"
#include "ieqa/scorer.hpp"
#include "ieqa/synth_data.hpp"
#include "ieqa/trainer.hpp"

using namespace ieqa;

namespace {

struct ThreadCountGuard {
  int saved;
  explicit ThreadCountGuard(int n) : saved(max_threads()) { set_thread_count(n); }
  ~ThreadCountGuard() { set_thread_count(saved); }
};

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("for_each_index visits every index exactly once") {
  for (Exec exec : {Exec::serial, Exec::parallel}) {
    std::vector<int> hits(1000, 0);
    for_each_index(hits.size(), exec, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("max_threads reports at least one worker") {
  CHECK(max_threads() >= 1);
}

TEST_CASE("kernel outputs are identical across thread counts") {
  GeneratorSpec spec;
  spec.seed = 5;
  spec.train_count = 97;  // awkward size on purpose
  spec.val_in_count = 41;
  spec.val_out_count = 17;
  spec.feature_dim = 8;

  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 16;
  tc.learning_rate = 0.02;
  tc.embed_dim = 16;
  tc.hidden_dim = 8;

  Dataset data1, data4;
  ScorerParams model1, model4;
  DefinitionValue vd1, vd4;
  std::vector<double> preds1, preds4;

  {
    ThreadCountGuard guard(1);
    data1 = generate(spec, Exec::parallel);
    auto [params, report] =
        train(data1.train, data1.val_in, "thread probe", tc, Exec::parallel);
    model1 = params;
    std::vector<VdSample> samples;
    for (const auto& r : data1.val_in)
      samples.push_back({r.features, quantize_to_triple(r.mos(tc.dimension))});
    vd1 = v_d_aggregate(samples, model1, "thread probe", Exec::parallel);
    preds1 = predict_scores(model1, data1.val_in, DecodeMode::expected, Exec::parallel);
  }
  {
    ThreadCountGuard guard(4);
    data4 = generate(spec, Exec::parallel);
    auto [params, report] =
        train(data4.train, data4.val_in, "thread probe", tc, Exec::parallel);
    model4 = params;
    std::vector<VdSample> samples;
    for (const auto& r : data4.val_in)
      samples.push_back({r.features, quantize_to_triple(r.mos(tc.dimension))});
    vd4 = v_d_aggregate(samples, model4, "thread probe", Exec::parallel);
    preds4 = predict_scores(model4, data4.val_in, DecodeMode::expected, Exec::parallel);
  }

  REQUIRE(data1.train.size() == data4.train.size());
  for (std::size_t i = 0; i < data1.train.size(); ++i) {
    CHECK(std::memcmp(data1.train[i].features.data(), data4.train[i].features.data(),
                      data1.train[i].features.size() * sizeof(double)) == 0);
    CHECK(data1.train[i].mos_visual == data4.train[i].mos_visual);
  }
  CHECK(std::memcmp(model1.w1.data(), model4.w1.data(),
                    model1.w1.size() * sizeof(double)) == 0);
  for (std::size_t h = 0; h < model1.w_out.size(); ++h)
    CHECK(std::memcmp(model1.w_out[h].data(), model4.w_out[h].data(),
                      model1.w_out[h].size() * sizeof(double)) == 0);
  CHECK(std::memcmp(&vd1.v, &vd4.v, sizeof(double)) == 0);
  CHECK(std::memcmp(preds1.data(), preds4.data(), preds1.size() * sizeof(double)) == 0);
}

}  // TEST_SUITE
