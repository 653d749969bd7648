#pragma once

#include "pathmark/model.hpp"
#include "pathmark/normalizer.hpp"
#include "pathmark/paths.hpp"

namespace pathmark {

/// Model -> graph -> paths -> normalized bag, as applied to indexed models
/// and to queries alike.
class EncodePipeline {
 public:
  explicit EncodePipeline(FilterConfig filter = {}, TokenizerConfig tokenizer = {})
      : filter_(std::move(filter)), normalizer_(std::move(tokenizer)) {}

  BagOfPaths encode(const Model& m) const { return normalizer_.normalize_bop(model_to_bop(m, filter_)); }
  BagOfPaths encode_query(const Model& m, const StopPathSet& stop) const {
    return filter_stop_paths(encode(m), stop);
  }

  const FilterConfig& filter() const { return filter_; }
  const Normalizer& normalizer() const { return normalizer_; }

 private:
  FilterConfig filter_;
  Normalizer normalizer_;
};

}  // namespace pathmark
