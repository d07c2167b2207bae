#pragma once

#include <json.hpp>

#include "imml/causal/criteria.hpp"
#include "imml/causal/do_calculus.hpp"
#include "imml/causal/scm.hpp"

namespace imml::causal {

using nlohmann::json;

/// {"nodes": [...], "edges": [["a", "b"], ...], "observed": [...]}.
/// A missing "observed" list marks every node observed.
Dag dag_from_json(const json& j);
json to_json(const Dag& g);

/// Graph fields plus "domains": {node: [labels]} and
/// "cpts": {node: {"parents": [...], "probs": [...]}}. Each CPT is flattened
/// row-major over its listed parents, last parent fastest, one entry per
/// value of the node inside each row.
DiscreteScm scm_from_json(const json& j);
json to_json(const DiscreteScm& scm);

json to_json(const ProbTable& t);
json to_json(const Path& p);
json to_json(const CriterionReport& r);
json to_json(const StepReport& r);

/// Throws CausalError with the offending file name when the file cannot be
/// read or parsed.
json read_json_file(const std::string& path);

}  // namespace imml::causal
