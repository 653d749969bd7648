#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmark/model.hpp"

namespace pathmark {

/// A generated or loaded corpus member with an optional domain label.
struct CorpusModel {
  std::string id;
  std::string label;
  Model model;
};

struct EcoreCorpusOptions {
  std::size_t models = 500;
  /// Domains used, taken in order from ecore_domains(); at most its size.
  std::size_t domains = 12;
  /// Class counts are drawn log-uniformly from this range.
  std::size_t min_classes = 3;
  std::size_t max_classes = 90;
  /// Probability that a class or feature gets a made-up, model-specific name.
  double rare_name_rate = 0.04;
  /// Share of models derived from an earlier model of the same domain by a
  /// few renames, removals and additions, like forks and versions in a
  /// public repository.
  double variant_rate = 0.2;
  std::uint64_t seed = 42;
};

/// Names of the built-in generator domains.
std::vector<std::string> ecore_domains();

/// Ecore-flavored meta-models (EPackage, EClass, EAttribute, EReference,
/// EEnum, EEnumLiteral). Each model draws its class and feature names from
/// one domain vocabulary and gets its own random structure, loosely guided by
/// per-domain conventions so that models of one domain look alike.
/// Models are labeled with their domain and assigned round-robin.
std::vector<CorpusModel> generate_ecore_corpus(const EcoreCorpusOptions& options = {});

/// Small UML-like state machines in the shape of the phone-call example,
/// with state and trigger names drawn from everyday device vocabularies.
std::vector<CorpusModel> generate_state_machines(std::size_t count, std::uint64_t seed);

/// Classes plus structural features for Ecore-flavored models, object count
/// otherwise. Used for the query size buckets.
std::size_t element_count(const Model& m);

}  // namespace pathmark
