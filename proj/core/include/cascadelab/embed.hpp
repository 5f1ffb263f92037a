#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cascadelab {

// Deterministic local substitute for a text-embedding API: signed feature
// hashing of character 3-grams, L2-normalized. Empty input maps to zeros.
std::vector<double> embed_question(std::string_view text, int dim);

std::map<int, std::vector<double>> load_embeddings(
    const std::filesystem::path& path);
void save_embeddings(const std::map<int, std::vector<double>>& embeddings,
                     const std::filesystem::path& path);

// Tunable d x d linear map applied to the hash embedding before it enters
// the state vector. Identity until fine-tuned.
class EmbeddingAdapter {
 public:
  EmbeddingAdapter() = default;
  explicit EmbeddingAdapter(int dim);

  int dim() const { return dim_; }
  bool is_identity() const { return dim_ == 0; }

  std::vector<double> apply(std::span<const double> embedding) const;

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  int dim_ = 0;
  std::vector<double> weights_;  // row-major d x d
};

}  // namespace cascadelab
