#pragma once

#include <stdexcept>
#include <string>

namespace scatteropt {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An index is missed or duplicated by one of the two partitionings.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// An interconnection input/output split is inconsistent with its block.
class SplitError : public Error {
public:
    using Error::Error;
};

/// Vector arguments disagree in length.
class LengthMismatchError : public Error {
public:
    using Error::Error;
};

/// A coordinate-change matrix is (numerically) singular.
class SingularTransformError : public Error {
public:
    using Error::Error;
};

/// Operation requires a parametric (canonical) block representation.
class NotCanonicalError : public Error {
public:
    using Error::Error;
};

/// The swept (a, Q) relation is multivalued; no functional reduction exists.
class NotReducibleError : public Error {
public:
    using Error::Error;
};

/// Block dimensions disagree with the governing partition.
class DimMismatchError : public Error {
public:
    using Error::Error;
};

/// Invalid element parameters (negative curvature, bad bounds, ...).
class BadParamsError : public Error {
public:
    using Error::Error;
};

/// A constitutive-relation map could not be derived.
class DerivationError : public Error {
public:
    using Error::Error;
};

/// The parametrization d(y) is not invertible on the probed interval.
class NonInvertibleParametrizationError : public Error {
public:
    using Error::Error;
};

/// The algebraic loop through the source elements is singular.
class SingularLoopError : public Error {
public:
    using Error::Error;
};

/// Iteration produced NaN/Inf or exceeded the divergence guard.
class NonFiniteStateError : public Error {
public:
    using Error::Error;
};

/// The stacked first-order system has no unique solution.
class SingularKktError : public Error {
public:
    using Error::Error;
};

/// Problem-file syntax or structure error; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace scatteropt
