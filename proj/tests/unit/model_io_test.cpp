#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ionet/dataset_io.hpp"
#include "ionet/error.hpp"
#include "ionet/neural_odometry.hpp"
#include "ionet/rng.hpp"

namespace ionet {
namespace {

namespace fs = std::filesystem;

Model sample_model() {
  Model m;
  m.params = ModelParams::initialize(ModelShape{6, 8, 2, 20}, 42);
  m.params.head_bias << 0.123456789012345678, -1e-300;
  m.norm.mean = {0.1, -0.2, 9.8, 0.0, 1e-9, -3.0};
  m.norm.scale = {1.5, 2.0, 0.7, 0.3, 0.31, 1.0 / 3.0};
  m.epochs_trained = 17;
  m.profile = "trolley";
  return m;
}

class ModelIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ionet_model_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(ModelIo, SaveLoadSaveIsByteIdentical) {
  const Model m = sample_model();
  save_model(m, dir_ / "a.json");
  const Model loaded = load_model(dir_ / "a.json");
  save_model(loaded, dir_ / "b.json");
  EXPECT_EQ(read_file(dir_ / "a.json"), read_file(dir_ / "b.json"));
  EXPECT_EQ(loaded.epochs_trained, 17);
  EXPECT_EQ(loaded.profile, "trolley");
  EXPECT_EQ(loaded.norm.scale, m.norm.scale);
  const auto a = m.params.tensors();
  const auto b = loaded.params.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].name, b[t].name);
    for (std::size_t i = 0; i < a[t].data.size(); ++i) EXPECT_EQ(a[t].data[i], b[t].data[i]);
  }
}

TEST_F(ModelIo, LoadedModelPredictsIdentically) {
  const Model m = sample_model();
  Rng rng(1);
  std::vector<ImuSample> s(20);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k] = {0.01 * static_cast<double>(k + 1), Vec3(rng.normal(), rng.normal(), 9.8), Vec3(rng.normal(), 0, 0)};
  }
  const Model loaded = deserialize_model(serialize_model(m));
  const PolarDelta a = model_forward(m, Window{s, 0.01, 0});
  const PolarDelta b = model_forward(loaded, Window{s, 0.01, 0});
  EXPECT_EQ(a.dl, b.dl);
  EXPECT_EQ(a.dpsi, b.dpsi);
}

TEST_F(ModelIo, TruncatedFileIsCorrupt) {
  const std::string text = serialize_model(sample_model());
  {
    std::ofstream out(dir_ / "t.json", std::ios::binary);
    out << text.substr(0, text.size() / 2);
  }
  try {
    load_model(dir_ / "t.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCorruptFile);
  }
}

TEST_F(ModelIo, Rejections) {
  std::string text = serialize_model(sample_model());
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  std::string newer = text;
  newer.replace(pos, 12, "\"version\": 2");
  try {
    deserialize_model(newer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kVersionMismatch);
  }
  std::string renamed = text;
  renamed.replace(renamed.find("layer1.forward.bias"), 19, "layer1.forward.bais");
  EXPECT_THROW(deserialize_model(renamed), Error);
  try {
    load_model(dir_ / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

}  // namespace
}  // namespace ionet
