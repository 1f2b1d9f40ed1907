#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory_resource>

namespace spblas::testing {

/// Thread-safe memory resource that counts every allocation and
/// deallocation passing through it, forwarding to new/delete.
class counting_resource final : public std::pmr::memory_resource {
public:
  std::int64_t allocations() const noexcept { return allocs_.load(); }
  std::int64_t deallocations() const noexcept { return deallocs_.load(); }
  std::int64_t balance() const noexcept { return allocs_.load() - deallocs_.load(); }
  std::int64_t live_bytes() const noexcept { return bytes_.load(); }

private:
  void* do_allocate(std::size_t n, std::size_t align) override {
    void* p = std::pmr::new_delete_resource()->allocate(n, align);
    ++allocs_;
    bytes_ += static_cast<std::int64_t>(n);
    return p;
  }

  void do_deallocate(void* p, std::size_t n, std::size_t align) override {
    std::pmr::new_delete_resource()->deallocate(p, n, align);
    ++deallocs_;
    bytes_ -= static_cast<std::int64_t>(n);
  }

  bool do_is_equal(const std::pmr::memory_resource& other) const noexcept override {
    return this == &other;
  }

  std::atomic<std::int64_t> allocs_{0};
  std::atomic<std::int64_t> deallocs_{0};
  std::atomic<std::int64_t> bytes_{0};
};

}  // namespace spblas::testing
