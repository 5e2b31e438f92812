#include "elmpi/model_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace elmpi {

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Writer {
 public:
  void kv(const std::string& name, const std::string& value) {
    out_ << "field " << name << ' ' << value << '\n';
  }
  void kv(const std::string& name, double value) { kv(name, format_double(value)); }
  void kv(const std::string& name, std::uint64_t value) { kv(name, std::to_string(value)); }
  void kv(const std::string& name, std::int64_t value) { kv(name, std::to_string(value)); }

  void vec(const std::string& name, const Vector& v) {
    out_ << "vector " << name << ' ' << v.size() << '\n';
    for (Index i = 0; i < v.size(); ++i)
      out_ << (i ? " " : "") << format_double(v(i));
    out_ << '\n';
  }

  void mat(const std::string& name, const Matrix& m) {
    out_ << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j)
        out_ << (j ? " " : "") << format_double(m(i, j));
      out_ << '\n';
    }
  }

  void kinds(const std::string& name, const std::vector<Activation>& kinds) {
    out_ << "kinds " << name << ' ' << kinds.size() << '\n';
    for (std::size_t i = 0; i < kinds.size(); ++i)
      out_ << (i ? " " : "") << to_string(kinds[i]);
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class Reader {
 public:
  explicit Reader(std::string payload) : in_(std::move(payload)) {}

  std::string expect(const std::string& tag, const std::string& name) {
    std::string got_tag, got_name;
    if (!(in_ >> got_tag >> got_name) || got_tag != tag || got_name != name)
      throw IoError("load_model: expected " + tag + " '" + name + "', found '" +
                    got_tag + " " + got_name + "'");
    return got_name;
  }

  double kv_double(const std::string& name) {
    expect("field", name);
    return read_double(name);
  }

  std::uint64_t kv_u64(const std::string& name) {
    expect("field", name);
    std::uint64_t v = 0;
    if (!(in_ >> v)) throw IoError("load_model: bad value for field '" + name + "'");
    return v;
  }

  std::int64_t kv_i64(const std::string& name) {
    expect("field", name);
    std::int64_t v = 0;
    if (!(in_ >> v)) throw IoError("load_model: bad value for field '" + name + "'");
    return v;
  }

  Vector vec(const std::string& name) {
    expect("vector", name);
    Index n = 0;
    if (!(in_ >> n) || n < 0)
      throw IoError("load_model: bad length for vector '" + name + "'");
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = read_double(name);
    return v;
  }

  Matrix mat(const std::string& name) {
    expect("matrix", name);
    Index rows = 0, cols = 0;
    if (!(in_ >> rows >> cols) || rows < 0 || cols < 0)
      throw IoError("load_model: bad shape for matrix '" + name + "'");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = read_double(name);
    return m;
  }

  std::vector<Activation> kinds(const std::string& name) {
    expect("kinds", name);
    std::size_t n = 0;
    if (!(in_ >> n)) throw IoError("load_model: bad length for kinds '" + name + "'");
    std::vector<Activation> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::string token;
      if (!(in_ >> token))
        throw IoError("load_model: truncated kinds '" + name + "'");
      v.push_back(activation_from_string(token));
    }
    return v;
  }

 private:
  double read_double(const std::string& name) {
    std::string token;
    if (!(in_ >> token))
      throw IoError("load_model: truncated value in '" + name + "'");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size())
      throw IoError("load_model: bad number '" + token + "' in '" + name + "'");
    return v;
  }

  std::istringstream in_;
};

void write_elm(Writer& w, const std::string& prefix, const ElmModel& m,
               const WeightCovariance& cov) {
  w.kv(prefix + ".input_dim", static_cast<std::int64_t>(m.layer.input_dim));
  w.kv(prefix + ".seed", m.layer.seed);
  w.kinds(prefix + ".kinds", m.layer.kinds);
  w.mat(prefix + ".weights", m.layer.weights);
  w.vec(prefix + ".beta", m.beta);
  w.kv(prefix + ".gamma", m.gamma);
  w.mat(prefix + ".p", m.p);
  w.mat(prefix + ".sigma", cov.sigma);
  w.kv(prefix + ".leverage_clamps", cov.leverage_clamp_count);
}

void read_elm(Reader& r, const std::string& prefix, ElmModel& m,
              WeightCovariance& cov) {
  m.layer.input_dim = static_cast<Index>(r.kv_i64(prefix + ".input_dim"));
  m.layer.seed = r.kv_u64(prefix + ".seed");
  m.layer.kinds = r.kinds(prefix + ".kinds");
  m.layer.weights = r.mat(prefix + ".weights");
  m.beta = r.vec(prefix + ".beta");
  m.gamma = r.kv_double(prefix + ".gamma");
  m.p = r.mat(prefix + ".p");
  cov.sigma = r.mat(prefix + ".sigma");
  cov.leverage_clamp_count = r.kv_i64(prefix + ".leverage_clamps");
  if (m.layer.weights.rows() != m.layer.input_dim + 1 ||
      static_cast<Index>(m.layer.kinds.size()) != m.layer.weights.cols() ||
      m.beta.size() != m.layer.weights.cols())
    throw IoError("load_model: inconsistent shapes in '" + prefix + "'");
}

}  // namespace

void save_model(const PiModel& model, const std::string& path) {
  Writer w;
  w.kv("n_train", static_cast<std::int64_t>(model.meta.n_train));
  w.kv("seed", model.meta.seed);
  w.kv("seed_layer_data", model.meta.seed_layer_data);
  w.kv("seed_layer_var", model.meta.seed_layer_var);
  w.kv("seed_split", model.meta.seed_split);
  w.kv("gamma_data", model.meta.gamma_data);
  w.kv("gamma_var", model.meta.gamma_var);
  w.vec("standardizer.mean", model.meta.standardizer.mean);
  w.vec("standardizer.stddev", model.meta.standardizer.stddev);
  Vector flags(static_cast<Index>(model.meta.standardizer.constant_flag.size()));
  for (Index i = 0; i < flags.size(); ++i)
    flags(i) = model.meta.standardizer.constant_flag[static_cast<std::size_t>(i)];
  w.vec("standardizer.constant_flag", flags);
  write_elm(w, "m_data", model.m_data, model.sigma_data);
  write_elm(w, "m_var", model.m_var, model.sigma_var);

  const std::string payload = w.str();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016" PRIx64, fnv1a64(payload));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_model: cannot open '" + path + "' for writing");
  out << kModelFormatVersion << '\n' << "checksum " << checksum << '\n' << payload;
  if (!out) throw IoError("save_model: write failed for '" + path + "'");
}

PiModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_model: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string contents = buffer.str();

  std::size_t line1 = contents.find('\n');
  if (line1 == std::string::npos)
    throw IoError("load_model: truncated file '" + path + "'");
  if (contents.substr(0, line1) != kModelFormatVersion)
    throw IoError("load_model: version mismatch, expected '" +
                  std::string(kModelFormatVersion) + "', found '" +
                  contents.substr(0, line1) + "'");
  std::size_t line2 = contents.find('\n', line1 + 1);
  if (line2 == std::string::npos)
    throw IoError("load_model: missing checksum line");
  std::string checksum_line = contents.substr(line1 + 1, line2 - line1 - 1);
  std::string payload = contents.substr(line2 + 1);

  char expected[32];
  std::snprintf(expected, sizeof(expected), "checksum %016" PRIx64, fnv1a64(payload));
  if (checksum_line != expected)
    throw IoError("load_model: checksum mismatch in '" + path + "'");

  Reader r(std::move(payload));
  PiModel model;
  model.meta.n_train = r.kv_i64("n_train");
  model.meta.seed = r.kv_u64("seed");
  model.meta.seed_layer_data = r.kv_u64("seed_layer_data");
  model.meta.seed_layer_var = r.kv_u64("seed_layer_var");
  model.meta.seed_split = r.kv_u64("seed_split");
  model.meta.gamma_data = r.kv_double("gamma_data");
  model.meta.gamma_var = r.kv_double("gamma_var");
  model.meta.standardizer.mean = r.vec("standardizer.mean");
  model.meta.standardizer.stddev = r.vec("standardizer.stddev");
  Vector flags = r.vec("standardizer.constant_flag");
  model.meta.standardizer.constant_flag.resize(static_cast<std::size_t>(flags.size()));
  for (Index i = 0; i < flags.size(); ++i)
    model.meta.standardizer.constant_flag[static_cast<std::size_t>(i)] =
        flags(i) != 0.0 ? 1 : 0;
  read_elm(r, "m_data", model.m_data, model.sigma_data);
  read_elm(r, "m_var", model.m_var, model.sigma_var);
  return model;
}

}  // namespace elmpi
