#pragma once

// Reference datasets for judging whether observed sequential structure exceeds
// chance. All three keep thread count, thread ids and every thread's length.

#include "emoseq/core.hpp"
#include "emoseq/rng.hpp"

namespace emoseq {

/// Permutes each thread's (p_pos, p_sub) pairs uniformly at random. Thread t
/// uses the stream derive_seed(seed, t).
Dataset thread_shuffle(const Dataset& dataset, Seed seed);

/// Permutes the (p_pos, p_sub) pairs of the whole dataset over all comment
/// slots (threads laid end to end in dataset order), using one stream Rng(seed).
Dataset global_shuffle(const Dataset& dataset, Seed seed);

/// Replaces `field` of every comment with an independent draw, with
/// replacement, from the dataset-wide empirical distribution of that field.
/// The other field is untouched. Thread t uses derive_seed(seed, t).
Dataset iid_resample(const Dataset& dataset, Field field, Seed seed);

}  // namespace emoseq
