#include "cascadelab/embed.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "cascadelab/errors.hpp"

namespace cascadelab {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ULL;

std::uint64_t fnv1a(const char* data, std::size_t len) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<std::uint8_t>(data[i]);
    h *= kFnvPrime;
  }
  return h;
}

void normalize(std::vector<double>& v) {
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
}

}  // namespace

std::vector<double> embed_question(std::string_view text, int dim) {
  if (dim < 8) {
    throw ConfigError("embedding dimension must be at least 8");
  }
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  if (text.size() < 3) {
    return v;
  }
  std::string lowered(text);
  for (char& c : lowered) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (std::size_t i = 0; i + 3 <= lowered.size(); ++i) {
    const std::uint64_t h = fnv1a(lowered.data() + i, 3);
    const auto bucket = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
    const double sign = (h >> 63) ? 1.0 : -1.0;
    v[bucket] += sign;
  }
  normalize(v);
  return v;
}

std::map<int, std::vector<double>> load_embeddings(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open embedding file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("embedding file '" + path.string() + "' is empty");
  }
  int dim = 0;
  {
    std::istringstream header(line);
    std::string tag;
    if (!(header >> tag >> dim) || tag != "dim" || dim < 1) {
      throw DataError("embedding header must be 'dim <d>'");
    }
  }
  std::map<int, std::vector<double>> result;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream row(line);
    int question_id = 0;
    if (!(row >> question_id)) {
      throw DataError("line " + std::to_string(line_number) +
                      ": expected question id");
    }
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(dim));
    double x = 0.0;
    while (row >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim) {
      throw DataError("line " + std::to_string(line_number) +
                      ": expected " + std::to_string(dim) + " values, got " +
                      std::to_string(v.size()));
    }
    normalize(v);
    if (!result.emplace(question_id, std::move(v)).second) {
      throw DataError("line " + std::to_string(line_number) +
                      ": duplicate question id " + std::to_string(question_id));
    }
  }
  return result;
}

void save_embeddings(const std::map<int, std::vector<double>>& embeddings,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  const int dim = embeddings.empty()
                      ? 0
                      : static_cast<int>(embeddings.begin()->second.size());
  out << "dim " << dim << '\n';
  out.precision(17);
  for (const auto& [question_id, v] : embeddings) {
    if (static_cast<int>(v.size()) != dim) {
      throw DataError("embedding for question " + std::to_string(question_id) +
                      " has inconsistent dimension");
    }
    out << question_id;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
}

EmbeddingAdapter::EmbeddingAdapter(int dim) : dim_(dim) {
  weights_.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim),
                  0.0);
  for (int i = 0; i < dim; ++i) {
    weights_[static_cast<std::size_t>(i) * dim + i] = 1.0;
  }
}

std::vector<double> EmbeddingAdapter::apply(
    std::span<const double> embedding) const {
  if (is_identity()) {
    return {embedding.begin(), embedding.end()};
  }
  if (static_cast<int>(embedding.size()) != dim_) {
    throw DataError("adapter dimension mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
  for (int r = 0; r < dim_; ++r) {
    const double* row = weights_.data() + static_cast<std::size_t>(r) * dim_;
    double acc = 0.0;
    for (int c = 0; c < dim_; ++c) acc += row[c] * embedding[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

}  // namespace cascadelab
