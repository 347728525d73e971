#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "mvmatch/core/check.h"
#include "mvmatch/core/rng.h"
#include "mvmatch/groups/group_sampler.h"

namespace mvm {

std::vector<int> QuotasFromCounts(std::span<const int> n, double beta,
                                  int budget) {
  const int m = static_cast<int>(n.size());
  MVM_CHECK(m >= 1, "no images");
  MVM_CHECK(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  MVM_CHECK(budget >= m, "budget below the number of images");
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) {
    MVM_CHECK(n[i] >= 0, "negative overlap count");
    w[i] = std::pow(n[i] + 1.0, beta);
  }

  std::vector<int> quota(m, 0);
  std::vector<char> fixed(m, 0);
  std::vector<double> ideal(m, 0.0);
  int remaining = budget;
  while (true) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!fixed[i]) total += w[i];
    }
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      if (fixed[i]) continue;
      ideal[i] = remaining * w[i] / total;
    }
    for (int i = 0; i < m; ++i) {
      if (!fixed[i] && ideal[i] < 1.0) {
        fixed[i] = 1;
        quota[i] = 1;
        changed = true;
      }
    }
    if (!changed) break;
    remaining = budget - static_cast<int>(std::count(fixed.begin(), fixed.end(), 1));
  }

  std::vector<int> order;
  int assigned = 0;
  for (int i = 0; i < m; ++i) {
    if (fixed[i]) continue;
    quota[i] = static_cast<int>(std::floor(ideal[i]));
    assigned += quota[i];
    order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ra = ideal[a] - std::floor(ideal[a]);
    const double rb = ideal[b] - std::floor(ideal[b]);
    if (ra != rb) return ra > rb;
    return n[a] > n[b];
  });
  for (size_t k = 0; assigned < remaining && k < order.size(); ++k) {
    ++quota[order[k]];
    ++assigned;
  }
  return quota;
}

std::vector<int> SourceQuotas(const OverlapMatrix& overlap, double tau,
                              double beta, int budget) {
  const int m = overlap.size;
  MVM_CHECK(m >= 1, "empty overlap matrix");
  std::vector<int> n(m, 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j != i && overlap.At(i, j) > tau) ++n[i];
    }
  }
  return QuotasFromCounts(n, beta, budget);
}

int DefaultBudget(int num_images, bool half) {
  MVM_CHECK(num_images >= 1, "num_images");
  const double full = num_images * std::sqrt(static_cast<double>(num_images));
  const double target = half ? full / 2.0 : full;
  const int budget = static_cast<int>(std::ceil(target - 1e-9));
  return std::max(budget, num_images);
}

void PairUsage::Record(int i, int j, bool track_pending) {
  ++counts[static_cast<size_t>(i) * size + j];
  pending.erase({i, j});
  if (track_pending && Count(j, i) == 0) pending.insert({j, i});
}

double GroupScore(int source, int candidate, std::span<const int> current,
                  const OverlapMatrix& overlap, const PairUsage& usage,
                  const GroupParams& params) {
  double coherence = 0.0;
  for (int k : current) coherence += overlap.At(k, candidate);
  const double raw = params.alpha_src * overlap.At(source, candidate) +
                     params.alpha_tgt * coherence;
  return raw / (1.0 + params.lambda * usage.Count(source, candidate));
}

BuiltGroup BuildGroup(int source, const OverlapMatrix& overlap,
                      PairUsage* usage, const GroupParams& params,
                      bool track_pending, std::span<const int> forced,
                      std::span<const uint8_t> allowed) {
  MVM_CHECK(params.max_targets >= 1, "K must be >= 1");
  MVM_CHECK(source >= 0 && source < overlap.size, "source index");
  MVM_CHECK(allowed.empty() || allowed.size() == static_cast<size_t>(overlap.size),
            "allowed mask length");
  BuiltGroup out;
  out.group.source = source;
  std::vector<char> taken(overlap.size, 0);
  taken[source] = 1;
  for (int f : forced) {
    if (static_cast<int>(out.group.targets.size()) >= params.max_targets) break;
    MVM_CHECK(f != source && !taken[f], "bad forced target");
    taken[f] = 1;
    out.group.targets.push_back(f);
  }
  while (static_cast<int>(out.group.targets.size()) < params.max_targets) {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < overlap.size; ++j) {
      if (taken[j] || (!allowed.empty() && !allowed[j])) continue;
      const double s =
          GroupScore(source, j, out.group.targets, overlap, *usage, params);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    if (best < 0) break;
    taken[best] = 1;
    out.group.targets.push_back(best);
  }
  for (int t : out.group.targets) usage->Record(source, t, track_pending);
  out.empty_warning = out.group.targets.empty();
  return out;
}

std::vector<uint8_t> PairAdjacency(int num_images,
                                   std::span<const ImageGroup> groups) {
  std::vector<uint8_t> adj(static_cast<size_t>(num_images) * num_images, 0);
  for (const ImageGroup& g : groups) {
    for (int t : g.targets) adj[static_cast<size_t>(g.source) * num_images + t] = 1;
  }
  return adj;
}

std::vector<ImageGroup> AugmentReciprocity(std::span<const ImageGroup> groups,
                                           const OverlapMatrix& overlap,
                                           PairUsage* usage,
                                           const GroupParams& params) {
  const int m = overlap.size;
  std::vector<uint8_t> paired = PairAdjacency(m, groups);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (usage->Count(i, j) > 0) paired[static_cast<size_t>(i) * m + j] = 1;
    }
  }
  std::vector<ImageGroup> extra;
  for (int j = 0; j < m; ++j) {
    std::vector<int> partners;
    for (const auto& [a, b] : usage->pending) {
      if (a == j) partners.push_back(b);
    }
    if (partners.empty()) continue;
    std::stable_sort(partners.begin(), partners.end(), [&](int a, int b) {
      return overlap.At(j, a) > overlap.At(j, b);
    });
    std::vector<uint8_t> allowed(m, 0);
    for (int k = 0; k < m; ++k) {
      allowed[k] = paired[static_cast<size_t>(j) * m + k] ||
                   paired[static_cast<size_t>(k) * m + j];
    }
    for (size_t start = 0; start < partners.size();
         start += params.max_targets) {
      const size_t end =
          std::min(partners.size(), start + static_cast<size_t>(params.max_targets));
      std::vector<int> forced(partners.begin() + start, partners.begin() + end);
      BuiltGroup g = BuildGroup(j, overlap, usage, params, false, forced, allowed);
      extra.push_back(std::move(g.group));
    }
  }
  return extra;
}

std::vector<ImageGroup> GroupPlan::All() const {
  std::vector<ImageGroup> all = stage1;
  all.insert(all.end(), stage2.begin(), stage2.end());
  return all;
}

GroupPlan SampleGroups(const OverlapMatrix& overlap,
                       const SamplerOptions& options) {
  const int m = overlap.size;
  GroupPlan plan;
  plan.budget = options.budget > 0 ? options.budget
                                   : DefaultBudget(m, options.half_budget);
  plan.quotas = SourceQuotas(overlap, options.tau, options.beta, plan.budget);

  std::vector<int> sources;
  const int max_quota = *std::max_element(plan.quotas.begin(), plan.quotas.end());
  for (int round = 0; round < max_quota; ++round) {
    for (int i = 0; i < m; ++i) {
      if (plan.quotas[i] > round) sources.push_back(i);
    }
  }
  if (options.stochastic) {
    Rng rng(options.seed);
    for (size_t i = sources.size(); i > 1; --i) {
      std::swap(sources[i - 1], sources[rng.UniformInt(i)]);
    }
  }

  PairUsage usage(m);
  for (int s : sources) {
    BuiltGroup g = BuildGroup(s, overlap, &usage, options.group, true);
    if (g.empty_warning) {
      ++plan.dropped_empty;
      continue;
    }
    plan.stage1.push_back(std::move(g.group));
  }
  plan.stage2 = AugmentReciprocity(plan.stage1, overlap, &usage, options.group);
  return plan;
}

std::string GroupManifestJson(const GroupPlan& plan,
                              const SamplerOptions& options) {
  nlohmann::json j;
  j["budget"] = plan.budget;
  j["quotas"] = plan.quotas;
  j["dropped_empty"] = plan.dropped_empty;
  j["params"] = {{"tau", options.tau},
                 {"beta", options.beta},
                 {"alpha_src", options.group.alpha_src},
                 {"alpha_tgt", options.group.alpha_tgt},
                 {"lambda", options.group.lambda},
                 {"max_targets", options.group.max_targets},
                 {"half_budget", options.half_budget},
                 {"stochastic", options.stochastic},
                 {"seed", options.seed}};
  nlohmann::json groups = nlohmann::json::array();
  for (int stage = 1; stage <= 2; ++stage) {
    for (const ImageGroup& g : stage == 1 ? plan.stage1 : plan.stage2) {
      groups.push_back(
          {{"source", g.source}, {"targets", g.targets}, {"stage", stage}});
    }
  }
  j["groups"] = groups;
  return j.dump(1) + "\n";
}

std::vector<ImageGroup> GroupsFromManifestJson(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  std::vector<ImageGroup> groups;
  for (const auto& g : j.at("groups")) {
    ImageGroup group;
    group.source = g.at("source").get<int>();
    group.targets = g.at("targets").get<std::vector<int>>();
    group.Validate();
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace mvm
