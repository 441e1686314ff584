#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sonowork {

enum class ErrorKind {
  // ingest
  EmptyInput,
  RaggedRows,
  NonNumericCell,
  BadHeader,
  NegativeWeight,
  UnknownColumn,
  EmptyTable,
  NonFiniteAbscissa,
  // transform
  AllNaN,
  NotNormalized,
  BadWindow,
  BadRange,
  BadSpec,
  // synth
  BadConfig,
  OutOfRange,
  BadFrequency,
  BadDuration,
  EmptySeries,
  BadTimeline,
  TooShort,
  BadSize,
  // training
  BadBlock,
  BadEvent,
  IllegalEvent,
  SkipDisabled,
  ReplayDisabled,
  NotCompleted,
  EmptySession,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::EmptyTable: return "EmptyTable";
    case ErrorKind::NonFiniteAbscissa: return "NonFiniteAbscissa";
    case ErrorKind::AllNaN: return "AllNaN";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::BadWindow: return "BadWindow";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::BadFrequency: return "BadFrequency";
    case ErrorKind::BadDuration: return "BadDuration";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::BadTimeline: return "BadTimeline";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BadSize: return "BadSize";
    case ErrorKind::BadBlock: return "BadBlock";
    case ErrorKind::BadEvent: return "BadEvent";
    case ErrorKind::IllegalEvent: return "IllegalEvent";
    case ErrorKind::SkipDisabled: return "SkipDisabled";
    case ErrorKind::ReplayDisabled: return "ReplayDisabled";
    case ErrorKind::NotCompleted: return "NotCompleted";
    case ErrorKind::EmptySession: return "EmptySession";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error. The optional
/// location fields are filled in where the failing operation knows them:
/// `row` is a zero-based data-row index, `column` a column name and `step`
/// the index of the failing transform step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view code() const noexcept { return to_string(kind_); }

  std::optional<std::size_t> row;
  std::optional<std::string> column;
  std::optional<std::size_t> step;

  Error& at_row(std::size_t r) & { row = r; return *this; }
  Error&& at_row(std::size_t r) && { row = r; return std::move(*this); }
  Error& in_column(std::string c) & { column = std::move(c); return *this; }
  Error&& in_column(std::string c) && { column = std::move(c); return std::move(*this); }
  Error& at_step(std::size_t s) & { step = s; return *this; }
  Error&& at_step(std::size_t s) && { step = s; return std::move(*this); }

 private:
  ErrorKind kind_;
};

}  // namespace sonowork
