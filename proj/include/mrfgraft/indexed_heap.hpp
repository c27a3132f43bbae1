#pragma once

// Array-backed binary min-heap with a key -> slot index, giving O(log size)
// insert, extract-min, erase and priority updates plus O(1) membership.
// Entries are ordered by (priority, key), so equal priorities pop in key order.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mrfgraft {

template <typename Key, typename Priority, typename Hash = std::hash<Key>>
class IndexedMinHeap {
public:
    struct Entry {
        Key key;
        Priority priority;
    };

    [[nodiscard]] std::size_t size() const { return heap_.size(); }
    [[nodiscard]] bool empty() const { return heap_.empty(); }
    [[nodiscard]] bool contains(const Key& k) const { return slot_.contains(k); }

    void clear() {
        heap_.clear();
        slot_.clear();
    }

    void insert(const Key& k, Priority p) {
        if (contains(k)) throw std::invalid_argument("IndexedMinHeap: key already present");
        slot_.emplace(k, heap_.size());
        heap_.push_back({k, p});
        sift_up(heap_.size() - 1);
    }

    [[nodiscard]] const Entry& top() const {
        if (heap_.empty()) throw std::out_of_range("IndexedMinHeap: top of empty heap");
        return heap_.front();
    }

    Entry extract_min() {
        if (heap_.empty()) throw std::out_of_range("IndexedMinHeap: extract from empty heap");
        Entry root = heap_.front();
        remove_at(0);
        return root;
    }

    [[nodiscard]] Priority priority(const Key& k) const { return heap_[slot_.at(k)].priority; }

    // Lowers the priority of k; raising it through this call is an error.
    void decrease_key(const Key& k, Priority p) {
        const std::size_t i = slot_.at(k);
        if (p > heap_[i].priority) throw std::invalid_argument("IndexedMinHeap: decrease_key would increase");
        heap_[i].priority = p;
        sift_up(i);
    }

    void update(const Key& k, Priority p) {
        const std::size_t i = slot_.at(k);
        const bool lower = less(Entry{k, p}, heap_[i]);
        heap_[i].priority = p;
        if (lower)
            sift_up(i);
        else
            sift_down(i);
    }

    void erase(const Key& k) { remove_at(slot_.at(k)); }

    // Heap order, not sorted order.
    [[nodiscard]] const std::vector<Entry>& entries() const { return heap_; }

private:
    std::vector<Entry> heap_;
    std::unordered_map<Key, std::size_t, Hash> slot_;

    static bool less(const Entry& a, const Entry& b) {
        if (a.priority < b.priority) return true;
        if (b.priority < a.priority) return false;
        return a.key < b.key;
    }

    void place(std::size_t i, Entry e) {
        slot_[e.key] = i;
        heap_[i] = std::move(e);
    }

    void remove_at(std::size_t i) {
        slot_.erase(heap_[i].key);
        if (i + 1 == heap_.size()) {
            heap_.pop_back();
            return;
        }
        Entry last = std::move(heap_.back());
        heap_.pop_back();
        const Key moved = last.key;
        place(i, std::move(last));
        sift_up(i);
        sift_down(slot_.at(moved));
    }

    void sift_up(std::size_t i) {
        Entry e = heap_[i];
        while (i > 0) {
            const std::size_t parent = (i - 1) / 2;
            if (!less(e, heap_[parent])) break;
            place(i, heap_[parent]);
            i = parent;
        }
        place(i, std::move(e));
    }

    void sift_down(std::size_t i) {
        Entry e = heap_[i];
        const std::size_t n = heap_.size();
        for (;;) {
            std::size_t child = 2 * i + 1;
            if (child >= n) break;
            if (child + 1 < n && less(heap_[child + 1], heap_[child])) ++child;
            if (!less(heap_[child], e)) break;
            place(i, heap_[child]);
            i = child;
        }
        place(i, std::move(e));
    }
};

}  // namespace mrfgraft
