#pragma once

#include <stdexcept>
#include <string>

namespace emobase {

// Base of every domain error. code() is the stable name used in service
// responses and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept { return "Error"; }
};

#define EMOBASE_DEFINE_ERROR(Name, Base)                              \
  class Name : public Base {                                          \
   public:                                                            \
    using Base::Base;                                                 \
    const char* code() const noexcept override { return #Name; }     \
  }

EMOBASE_DEFINE_ERROR(IngestError, Error);
EMOBASE_DEFINE_ERROR(ConfigError, Error);
EMOBASE_DEFINE_ERROR(ScheduleError, Error);
EMOBASE_DEFINE_ERROR(FeatureError, Error);
EMOBASE_DEFINE_ERROR(DatasetError, Error);
EMOBASE_DEFINE_ERROR(ValueError, Error);
EMOBASE_DEFINE_ERROR(TrainError, Error);
EMOBASE_DEFINE_ERROR(PredictError, Error);
EMOBASE_DEFINE_ERROR(MappingError, Error);
EMOBASE_DEFINE_ERROR(QuestionnaireError, Error);
EMOBASE_DEFINE_ERROR(ValidationError, Error);
EMOBASE_DEFINE_ERROR(FormatError, Error);
EMOBASE_DEFINE_ERROR(NotFoundError, Error);
EMOBASE_DEFINE_ERROR(StoreError, Error);
EMOBASE_DEFINE_ERROR(ConflictError, Error);

#undef EMOBASE_DEFINE_ERROR

}  // namespace emobase
