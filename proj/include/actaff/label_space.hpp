#pragma once

#include <string>
#include <vector>

namespace actaff {

// Vocabularies for the three prediction levels. Sub-activity labels apply to
// activity nodes, affordance labels to object nodes, high-level labels to
// whole sequences. Label indices are positions in these lists.
struct LabelSpace {
  std::vector<std::string> subactivities;
  std::vector<std::string> affordances;
  std::vector<std::string> highlevel;

  int num_subactivities() const { return static_cast<int>(subactivities.size()); }
  int num_affordances() const { return static_cast<int>(affordances.size()); }
  int num_highlevel() const { return static_cast<int>(highlevel.size()); }

  // Index lookups; throw std::invalid_argument on unknown names.
  int subactivity_index(const std::string& name) const;
  int affordance_index(const std::string& name) const;
  int highlevel_index(const std::string& name) const;

  // Throws std::invalid_argument on empty or duplicated label lists.
  void validate() const;

  // CAD-120 vocabularies.
  static LabelSpace defaults();
};

} // namespace actaff
