#pragma once

#include <span>
#include <string>
#include <vector>

#include "commgen/common.hpp"
#include "commgen/corpus.hpp"
#include "commgen/dataset.hpp"
#include "commgen/genealogy.hpp"
#include "commgen/lang_model.hpp"

namespace commgen {

struct GrowthParams {
  GenealogyParams genealogy;
  LangParams lang;
  // The rate clock starts at this member ordinal; normally equal to the
  // eligibility member threshold.
  std::size_t base_members = 100;
};

// Lower median of final member counts over the eligible communities.
std::size_t empirical_median_size(const CorpusIndex& index,
                                  std::span<const CommunityId> eligible);

struct GrowthTargets {
  bool label = false;        // final size strictly exceeds the median
  double rate_target = 0;    // ln(t_median_member - t_base_member), seconds; NaN unless label
};

GrowthTargets growth_targets(const CorpusIndex& index, CommunityId child,
                             std::size_t median_size, std::size_t base_members);

std::vector<std::string> growth_feature_names(const GrowthParams& params);

// One child's feature vector, aligned with growth_feature_names. Parent-meta
// entries are NaN (paired with indicator features) when no parent qualifies.
std::vector<double> extract_growth_features(const CorpusIndex& index, CommunityId child,
                                            const ChildGenealogy& genealogy,
                                            const GrowthParams& params);

// Feature table over the eligible children; children with fewer than k
// members are skipped and counted in *skipped.
Dataset build_growth_dataset(const CorpusIndex& index, std::span<const CommunityId> eligible,
                             const GrowthParams& params, std::size_t* skipped = nullptr);

// Feature-family partition of a growth feature-name list, in a fixed order:
// temporal, parent_basic, parent_meta, new_user.
std::vector<std::pair<std::string, std::vector<std::size_t>>> growth_feature_families(
    std::span<const std::string> names);

}  // namespace commgen
