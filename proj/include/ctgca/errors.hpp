#pragma once

#include <stdexcept>
#include <string>

namespace ctgca {

// Root of the library's exception hierarchy. Everything thrown on purpose
// derives from Error, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed bytes or text: bad NIfTI header fields, bad CSV cells, bad JSON.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the documented contract (negative dims, bad scores, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Singular or otherwise degenerate numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Brain extraction produced no usable voxels.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

// Registration could not run (no overlap, no brain voxels in the template).
class RegistrationError : public Error {
 public:
  using Error::Error;
};

// Train/evaluate protocol violations: split leakage, id mismatches, ...
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A score was requested for a region marked not assessable.
class NotAssessableError : public Error {
 public:
  using Error::Error;
};

// A total was requested from a rating that still has unassessable regions.
class IncompleteRatingError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctgca
