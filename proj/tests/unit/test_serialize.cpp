#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rfls/serialize.hpp"

namespace ser = rfls::serialize;
using rfls::Matrix;

TEST(Serialize, MatrixRoundTrip) {
  Matrix m(2, 3);
  m << 1.0 / 3.0, -2e-300, 4.5e12, 0.1, std::nan(""), 7.0;
  const auto j = ser::to_json(m);
  EXPECT_EQ(j["rows"], 2);
  EXPECT_EQ(j["cols"], 3);
  EXPECT_TRUE(j["data"][4].is_null());
  const Matrix back = ser::matrix_from_json(nlohmann::ordered_json::parse(ser::dump(j)));
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (std::isnan(m(r, c))) {
        EXPECT_TRUE(std::isnan(back(r, c)));
      } else {
        EXPECT_EQ(back(r, c), m(r, c));
      }
    }
  }
}

TEST(Serialize, NumbersUseSeventeenDigits) {
  EXPECT_EQ(ser::format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(ser::format_number(std::nan("")), "nan");
  EXPECT_EQ(ser::format_number(-INFINITY), "-inf");
}

TEST(Serialize, SweepCsvHeaderAndRows) {
  std::vector<rfls::covariance::SweepRow> rows(2);
  rows[0] = {0.0, 0.5, 0.75, true, -1.0};
  rows[1] = {-1.0, std::nan(""), std::nan(""), false, 2.0};
  std::ostringstream os;
  ser::write_sweep_csv(os, rows);
  EXPECT_EQ(os.str(), "delta2,psa,pf,hurwitz\n0,0.5,0.75,true\n-1,nan,nan,false\n");
}

TEST(Serialize, ErrorsCsv) {
  std::vector<rfls::sim::RunResult> runs(2);
  runs[0].filter_error = 0.25;
  runs[0].smoother_error = -0.5;
  runs[1].divergent = true;
  std::ostringstream os;
  ser::write_errors_csv(os, runs);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "run,filter_error,smoother_error,divergent");
  EXPECT_NE(os.str().find("0,0.25,-0.5,false"), std::string::npos);
}
