#ifndef SGW_STATE_TABLE_HPP
#define SGW_STATE_TABLE_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sgw {

class TableOverflowError : public std::runtime_error {
 public:
    TableOverflowError() : std::runtime_error("state table capacity limit exceeded") {}
};

// Open-addressing hash table for per-flow state, keyed by the 64-bit flow
// key. Keys are already uniformly distributed (SipHash output), so the low
// bits index the table directly without rehashing. Probing is quadratic
// with triangular increments (1, 3, 6, 10, ...) which visits every slot of
// a power-of-two table. The table doubles whenever it would become more
// than half full; tombstones left by removals are purged on resize.
//
// Single-owner structure: each gateway worker owns exactly one table.
// Instrumentation counters (probes, resizes) are exported for the cost
// model and carry no synchronization.
template <typename V>
class StateTable {
 public:
    static constexpr size_t kInitialCapacity = 8;
    static constexpr size_t kMaxCapacity = size_t{1} << 31;

    StateTable() { reset(kInitialCapacity); }

    // Inserts key -> value. Returns false and leaves the stored value
    // untouched when the key is already present. Grows first whenever the
    // new entry would push occupied + tombstones past half capacity.
    bool insert(uint64_t key, V value) {
        Probe probe = find(key);
        if (probe.found) return false;
        if (occupied_ + tombstones_ + 1 > capacity_ / 2) {
            grow();
            probe = find(key);
        }
        size_t slot = probe.free_slot;
        if (slots_[slot].state == SlotState::kTombstone) tombstones_--;
        slots_[slot].state = SlotState::kOccupied;
        slots_[slot].key = key;
        slots_[slot].value = std::move(value);
        occupied_++;
        return true;
    }

    V* lookup(uint64_t key) {
        Probe probe = find(key);
        return probe.found ? &slots_[probe.slot].value : nullptr;
    }

    // probe_count still advances: the counter tracks table work, not writes.
    const V* lookup(uint64_t key) const {
        Probe probe = find(key);
        return probe.found ? &slots_[probe.slot].value : nullptr;
    }

    bool remove(uint64_t key) {
        Probe probe = find(key);
        if (!probe.found) return false;
        slots_[probe.slot].state = SlotState::kTombstone;
        slots_[probe.slot].value = V{};
        occupied_--;
        tombstones_++;
        return true;
    }

    bool contains(uint64_t key) const { return lookup(key) != nullptr; }

    size_t size() const { return occupied_; }
    size_t capacity() const { return capacity_; }
    size_t tombstones() const { return tombstones_; }
    uint64_t resize_count() const { return resize_count_; }
    uint64_t probe_count() const { return probe_count_; }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const Slot& s : slots_)
            if (s.state == SlotState::kOccupied) fn(s.key, s.value);
    }

 private:
    enum class SlotState : uint8_t { kEmpty, kOccupied, kTombstone };

    struct Slot {
        uint64_t key = 0;
        V value{};
        SlotState state = SlotState::kEmpty;
    };

    struct Probe {
        bool found = false;
        size_t slot = 0;       // valid when found
        size_t free_slot = 0;  // insertion point when not found
    };

    Probe find(uint64_t key) const {
        const size_t mask = capacity_ - 1;
        size_t idx = static_cast<size_t>(key) & mask;
        size_t first_free = capacity_;  // sentinel: none seen yet
        for (size_t step = 1;; ++step) {
            probe_count_++;
            const Slot& s = slots_[idx];
            if (s.state == SlotState::kEmpty) {
                Probe p;
                p.free_slot = (first_free != capacity_) ? first_free : idx;
                return p;
            }
            if (s.state == SlotState::kOccupied && s.key == key) {
                Probe p;
                p.found = true;
                p.slot = idx;
                return p;
            }
            if (s.state == SlotState::kTombstone && first_free == capacity_) first_free = idx;
            idx = (idx + step) & mask;  // triangular increments
        }
    }

    void grow() {
        if (capacity_ * 2 > kMaxCapacity) throw TableOverflowError();
        std::vector<Slot> old = std::move(slots_);
        reset(capacity_ * 2);
        resize_count_++;
        for (Slot& s : old) {
            if (s.state != SlotState::kOccupied) continue;
            Probe probe = find(s.key);
            Slot& dest = slots_[probe.free_slot];
            dest.state = SlotState::kOccupied;
            dest.key = s.key;
            dest.value = std::move(s.value);
            occupied_++;
        }
    }

    void reset(size_t cap) {
        slots_.clear();
        slots_.resize(cap);
        capacity_ = cap;
        occupied_ = 0;
        tombstones_ = 0;
    }

    std::vector<Slot> slots_;
    size_t capacity_ = 0;
    size_t occupied_ = 0;
    size_t tombstones_ = 0;
    uint64_t resize_count_ = 0;
    mutable uint64_t probe_count_ = 0;
};

}  // namespace sgw

#endif  // SGW_STATE_TABLE_HPP
