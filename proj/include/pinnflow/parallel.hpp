#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pinnflow {

/// Persistent worker pool for batch evaluation over point slices.
///
/// Work is split by the caller into a fixed number of independent jobs; the
/// pool only decides which worker runs which job, never how results combine.
/// Callers that need reproducible sums must give each job its own output
/// slot and reduce in job order, which makes results independent of the
/// thread count.
class TaskPool {
public:
    /// threads <= 1 runs everything inline on the calling thread.
    explicit TaskPool(int threads);
    ~TaskPool();

    TaskPool(const TaskPool&) = delete;
    TaskPool& operator=(const TaskPool&) = delete;

    int thread_count() const { return static_cast<int>(workers_.size()) + 1; }

    /// Runs fn(0) .. fn(job_count-1), blocking until all jobs finish.
    /// fn must be safe to call concurrently for distinct job indices.
    void run(int job_count, const std::function<void(int)>& fn);

private:
    void worker_loop();

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(int)>* job_fn_ = nullptr;
    int job_count_ = 0;
    int next_job_ = 0;
    int jobs_in_flight_ = 0;
    std::uint64_t generation_ = 0;
    bool stopping_ = false;
};

/// Thread count from PINNFLOW_THREADS, defaulting to all hardware cores.
int default_thread_count();

/// Fixed slice width used to partition point batches. Results of sliced
/// reductions depend only on this constant, not on the thread count.
inline constexpr int kBatchSliceSize = 128;

inline int slice_count(std::size_t n) {
    return static_cast<int>((n + kBatchSliceSize - 1) / kBatchSliceSize);
}

} // namespace pinnflow
