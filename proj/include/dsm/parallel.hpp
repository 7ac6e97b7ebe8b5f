#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dsm {

// Fixed-partition fork/join pool. Work is always split into `threads()`
// contiguous chunks by index, so for a given thread count the assignment of
// items to chunks is a pure function of the range — this is what makes
// multi-threaded training bitwise reproducible: every reduction over chunk
// results is performed in chunk order after the join.
class ParallelPool {
  public:
    explicit ParallelPool(int threads = 0) {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        n_threads_ = threads > 0 ? threads : hw;
        if (n_threads_ > 1) {
            workers_.reserve(static_cast<std::size_t>(n_threads_ - 1));
            for (int t = 1; t < n_threads_; ++t)
                workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    ~ParallelPool() {
        {
            std::unique_lock<std::mutex> lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ParallelPool(const ParallelPool&) = delete;
    ParallelPool& operator=(const ParallelPool&) = delete;

    int threads() const { return n_threads_; }

    /// Runs fn(chunk_id, begin, end) on every chunk of [0, n). Blocks until
    /// all chunks are done. chunk_id is in [0, threads()).
    void for_chunks(std::int64_t n, const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
        if (n <= 0) return;
        if (n_threads_ == 1 || n == 1) {
            fn(0, 0, n);
            return;
        }
        {
            std::unique_lock<std::mutex> lk(mu_);
            job_ = &fn;
            job_n_ = n;
            pending_ = n_threads_ - 1;
            ++epoch_;
        }
        cv_.notify_all();
        run_chunk(0);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

  private:
    void run_chunk(int t) {
        const std::int64_t n = job_n_;
        const std::int64_t per = n / n_threads_;
        const std::int64_t rem = n % n_threads_;
        const std::int64_t begin = t * per + std::min<std::int64_t>(t, rem);
        const std::int64_t end = begin + per + (t < rem ? 1 : 0);
        if (begin < end) (*job_)(t, begin, end);
    }

    void worker_loop(int t) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int, std::int64_t, std::int64_t)>* job = nullptr;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
                if (stop_) return;
                seen = epoch_;
                job = job_;
            }
            if (job) run_chunk(t);
            {
                std::unique_lock<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    int n_threads_ = 1;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(int, std::int64_t, std::int64_t)>* job_ = nullptr;
    std::int64_t job_n_ = 0;
    int pending_ = 0;
    std::uint64_t epoch_ = 0;
    bool stop_ = false;
};

}  // namespace dsm
