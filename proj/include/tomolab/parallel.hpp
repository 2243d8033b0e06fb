#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace tomolab {

// min(requested, PTM_TOMOLAB_THREADS if set), at least 1. requested <= 0 means hardware count.
int resolve_threads(int requested);

// Runs fn(0..n-1) on up to `threads` workers. Exceptions are collected and the one from the
// lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Failure inside the reconstruction pipeline, tagged with the stage and the offending sequence.
struct StageError : std::runtime_error {
    StageError(std::string stage_, std::string sequence_, const std::string& what)
        : std::runtime_error(stage_ + (sequence_.empty() ? "" : " [" + sequence_ + "]") + ": " + what),
          stage(std::move(stage_)), sequence(std::move(sequence_)) {}
    std::string stage;
    std::string sequence;
};

} // namespace tomolab
