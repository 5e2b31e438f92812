#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elmpi/model_io.hpp"
#include "elmpi/random.hpp"

using namespace elmpi;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PiModel trained_model(Index n, std::uint64_t seed, PiConfig config = {}) {
  GeneratorSpec spec;
  spec.n = n;
  spec.seed = seed;
  Dataset data = synth(spec);
  config.seed = seed + 1;
  return fit_pi(data.x, data.y, config);
}

struct TempPath {
  std::filesystem::path path;
  explicit TempPath(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempPath() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("model round-trip: predictions match and files are byte-identical") {
  PiModel model = trained_model(300, 7);
  TempPath first("elmpi_model_a.txt"), second("elmpi_model_b.txt");
  save_model(model, first.path.string());
  PiModel loaded = load_model(first.path.string());
  save_model(loaded, second.path.string());
  CHECK(slurp(first.path) == slurp(second.path));

  SeededRng rng(9);
  Matrix x(500, 1);
  for (Index i = 0; i < 500; ++i) x(i, 0) = rng.uniform(-2.0, 12.0);
  std::vector<IntervalPrediction> want = predict_pi(model, x, 0.95);
  std::vector<IntervalPrediction> got = predict_pi(loaded, x, 0.95);
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(got[i].y_hat == want[i].y_hat);
    CHECK(got[i].lower == want[i].lower);
    CHECK(got[i].upper == want[i].upper);
    CHECK(got[i].s == want[i].s);
  }
  CHECK(loaded.meta.gamma_data == model.meta.gamma_data);
  CHECK(loaded.meta.n_train == model.meta.n_train);
}

TEST_CASE("model round-trip at width 347") {
  PiConfig config;
  config.specs_data = {{Activation::linear, 147}, {Activation::sigmoid, 200}};
  config.specs_var = {{Activation::linear, 1}, {Activation::tanh, 10}};
  config.gamma_grid = {1.0};

  SeededRng rng(11);
  Matrix x(600, 147);
  Vector y(600);
  for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  for (Index i = 0; i < 600; ++i) y(i) = rng.normal();
  PiConfig seeded = config;
  seeded.seed = 12;
  PiModel model = fit_pi(x, y, seeded);
  REQUIRE(model.m_data.layer.width() == 347);

  TempPath file("elmpi_model_wide.txt");
  save_model(model, file.path.string());
  PiModel loaded = load_model(file.path.string());
  CHECK(loaded.m_data.layer.width() == 347);
  CHECK(loaded.m_data.p == model.m_data.p);
  CHECK(loaded.sigma_data.sigma == model.sigma_data.sigma);
  CHECK(loaded.m_data.layer.weights == model.m_data.layer.weights);
}

TEST_CASE("model load: tamper and version errors name the problem") {
  PiModel model = trained_model(120, 21);
  TempPath file("elmpi_model_tamper.txt");
  save_model(model, file.path.string());

  std::string contents = slurp(file.path);
  // Flip one payload digit.
  std::size_t pos = contents.find("field gamma_data");
  REQUIRE(pos != std::string::npos);
  std::size_t digit = contents.find_first_of("0123456789", pos + 17);
  contents[digit] = contents[digit] == '9' ? '8' : '9';
  {
    std::ofstream out(file.path, std::ios::binary);
    out << contents;
  }
  try {
    load_model(file.path.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("checksum") != std::string::npos);
  }

  {
    std::ofstream out(file.path, std::ios::binary);
    out << "elm-pi/999\nchecksum 0000000000000000\n";
  }
  try {
    load_model(file.path.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}

TEST_CASE("model load: truncation names the missing field") {
  PiModel model = trained_model(100, 31);
  TempPath file("elmpi_model_trunc.txt");
  save_model(model, file.path.string());
  std::string contents = slurp(file.path);
  std::size_t cut = contents.find("matrix m_var.sigma");
  REQUIRE(cut != std::string::npos);
  std::string truncated = contents.substr(0, cut);

  // Recompute the checksum so truncation itself is what the loader sees.
  std::size_t payload_start = truncated.find('\n', truncated.find('\n') + 1) + 1;
  std::string payload = truncated.substr(payload_start);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016lx", static_cast<unsigned long>(hash));
  {
    std::ofstream out(file.path, std::ios::binary);
    out << kModelFormatVersion << "\nchecksum " << checksum << "\n" << payload;
  }
  try {
    load_model(file.path.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("m_var.sigma") != std::string::npos);
  }
}
