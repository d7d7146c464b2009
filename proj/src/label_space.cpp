#include "actaff/label_space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace actaff {

namespace {

int index_of(const std::vector<std::string>& v, const std::string& name,
             const char* what) {
  auto it = std::find(v.begin(), v.end(), name);
  if (it == v.end())
    throw std::invalid_argument(std::string("unknown ") + what + " label: " + name);
  return static_cast<int>(it - v.begin());
}

void check_unique(const std::vector<std::string>& v, const char* what) {
  if (v.empty())
    throw std::invalid_argument(std::string(what) + " label list is empty");
  std::set<std::string> seen(v.begin(), v.end());
  if (seen.size() != v.size())
    throw std::invalid_argument(std::string(what) + " label list has duplicates");
}

} // namespace

int LabelSpace::subactivity_index(const std::string& name) const {
  return index_of(subactivities, name, "sub-activity");
}

int LabelSpace::affordance_index(const std::string& name) const {
  return index_of(affordances, name, "affordance");
}

int LabelSpace::highlevel_index(const std::string& name) const {
  return index_of(highlevel, name, "high-level");
}

void LabelSpace::validate() const {
  check_unique(subactivities, "sub-activity");
  check_unique(affordances, "affordance");
  check_unique(highlevel, "high-level");
}

LabelSpace LabelSpace::defaults() {
  LabelSpace ls;
  ls.subactivities = {"reaching", "moving",  "pouring",  "eating",    "drinking",
                      "opening",  "placing", "closing",  "scrubbing", "null"};
  ls.affordances = {"reachable", "movable",  "pourable",  "pourto",
                    "containable", "drinkable", "openable", "placeable",
                    "closable", "scrubbable", "scrubber", "stationary"};
  ls.highlevel = {"making_cereal",    "taking_medicine", "stacking_objects",
                  "unstacking_objects", "microwaving_food", "picking_objects",
                  "cleaning_objects", "taking_food",     "arranging_objects",
                  "having_meal"};
  return ls;
}

} // namespace actaff
