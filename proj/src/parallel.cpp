#include "pinnflow/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pinnflow {

TaskPool::TaskPool(int threads) {
    int extra = threads - 1;
    for (int i = 0; i < extra; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

TaskPool::~TaskPool() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) {
        w.join();
    }
}

void TaskPool::run(int job_count, const std::function<void(int)>& fn) {
    if (job_count <= 0) {
        return;
    }
    if (workers_.empty() || job_count == 1) {
        for (int j = 0; j < job_count; ++j) {
            fn(j);
        }
        return;
    }

    {
        std::lock_guard<std::mutex> lock(mutex_);
        job_fn_ = &fn;
        job_count_ = job_count;
        next_job_ = 0;
        jobs_in_flight_ = job_count;
        ++generation_;
    }
    wake_.notify_all();

    // The calling thread works too.
    for (;;) {
        int job;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (next_job_ >= job_count_) {
                break;
            }
            job = next_job_++;
        }
        fn(job);
        std::lock_guard<std::mutex> lock(mutex_);
        if (--jobs_in_flight_ == 0) {
            done_.notify_all();
        }
    }

    std::unique_lock<std::mutex> lock(mutex_);
    done_.wait(lock, [this] { return jobs_in_flight_ == 0; });
    job_fn_ = nullptr;
}

void TaskPool::worker_loop() {
    std::uint64_t seen_generation = 0;
    for (;;) {
        const std::function<void(int)>* fn = nullptr;
        {
            std::unique_lock<std::mutex> lock(mutex_);
            wake_.wait(lock, [&] {
                return stopping_ || (job_fn_ != nullptr && generation_ != seen_generation && next_job_ < job_count_);
            });
            if (stopping_) {
                return;
            }
            seen_generation = generation_;
            fn = job_fn_;
        }
        for (;;) {
            int job;
            {
                std::lock_guard<std::mutex> lock(mutex_);
                if (job_fn_ != fn || next_job_ >= job_count_) {
                    break;
                }
                job = next_job_++;
            }
            (*fn)(job);
            std::lock_guard<std::mutex> lock(mutex_);
            if (--jobs_in_flight_ == 0) {
                done_.notify_all();
            }
        }
    }
}

int default_thread_count() {
    if (const char* env = std::getenv("PINNFLOW_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n >= 1) {
                return n;
            }
        } catch (...) {
            // fall through to the hardware default
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace pinnflow
