#pragma once

#include <map>

#include "aosheet/value.hpp"
#include "aosheet/workbook.hpp"

namespace aosheet {

/// Evaluated value of every non-empty cell of a workbook snapshot.
class ValueGrid {
public:
    const Value* find(const CellAddr& addr) const {
        auto it = values_.find(addr);
        return it == values_.end() ? nullptr : &it->second;
    }
    const std::map<CellAddr, Value>& values() const { return values_; }
    void set(const CellAddr& addr, Value v) { values_.insert_or_assign(addr, std::move(v)); }

    friend bool operator==(const ValueGrid&, const ValueGrid&) = default;

private:
    std::map<CellAddr, Value> values_;
};

/// Value of a literal cell; formulas are not evaluated here.
Value literal_value(const CellContent& content);

/// Dependency-ordered evaluation. Cells on a reference cycle, and every cell that
/// depends on one, evaluate to #CYCLE!.
ValueGrid evaluate_workbook(const Workbook& wb);

}  // namespace aosheet
