#pragma once

#include <memory>
#include <utility>

namespace aosheet {

/// Immutable, shareable owning pointer with value equality. Used for recursive AST nodes.
template <class T>
class Box {
public:
    Box(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }
    const T& get() const { return *ptr_; }

    friend bool operator==(const Box& a, const Box& b) {
        return a.ptr_ == b.ptr_ || *a.ptr_ == *b.ptr_;
    }

private:
    std::shared_ptr<const T> ptr_;
};

}  // namespace aosheet
