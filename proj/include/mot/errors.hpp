#ifndef MOT_ERRORS_HPP
#define MOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mot {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MOT_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                       \
      public:                                                         \
        explicit Name(const std::string& what = #Name) : Error(what) {} \
    }

MOT_DEFINE_ERROR(NotInConvexOrder);
MOT_DEFINE_ERROR(NotIrreducible);
MOT_DEFINE_ERROR(GridTooCoarse);
MOT_DEFINE_ERROR(KernelNotMartingale);
MOT_DEFINE_ERROR(ModeratorInvalid);
MOT_DEFINE_ERROR(OutsideInterior);
MOT_DEFINE_ERROR(PointOutsideInterior);
MOT_DEFINE_ERROR(PathOutsideOmega);
MOT_DEFINE_ERROR(NumericalFailure);
MOT_DEFINE_ERROR(NotOptimal);
MOT_DEFINE_ERROR(PrimalNotSolved);
MOT_DEFINE_ERROR(BadHorizon);
MOT_DEFINE_ERROR(ConfigError);
MOT_DEFINE_ERROR(SuperhedgeViolation);

#undef MOT_DEFINE_ERROR

}  // namespace mot

#endif
