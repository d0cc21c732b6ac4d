#include <gtest/gtest.h>

#include <sstream>

#include "hankel/matrix_csv.hpp"
#include "hankel/sampling.hpp"

TEST(MatrixCsv, RoundTripIsExact) {
  auto rng = hankel::make_stream(12, 0);
  std::vector<hankel::LabeledMatrix> in;
  for (int m = 1; m <= 4; ++m) {
    const auto spec = hankel::DistributionSpec::parse("W(d=" + std::to_string(m) + ",a=" + std::to_string(m + 1) +
                                                      ",sigma=I)");
    in.push_back({"w" + std::to_string(m), hankel::MatrixSampler(spec)(rng)});
  }
  in.push_back({"with,comma", hankel::SpectralMatrix(Eigen::Matrix2d::Identity())});
  std::stringstream ss;
  hankel::write_matrix_csv(ss, in);
  const auto out = hankel::read_matrix_csv(ss);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i].id, in[i].id);
    EXPECT_EQ(out[i].matrix.entries(), in[i].matrix.entries());
  }
}

TEST(MatrixCsv, HeaderCommentsAndUnlabelledWriter) {
  std::stringstream ss("id,m,v11,v12,v22\n# note\n\na,2,2,1,3\nb,1,4\n");
  const auto out = hankel::read_matrix_csv(ss);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].matrix.entries()(1, 0), 1.0);
  EXPECT_EQ(out[1].matrix.dim(), 1);
  std::stringstream w;
  hankel::write_matrix_csv(w, hankel::matrices_of(out));
  EXPECT_EQ(w.str(), "1,2,2,1,3\n2,1,4\n");
}

TEST(MatrixCsv, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      hankel::read_matrix_csv(ss, "x.csv");
    } catch (const hankel::input_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("a,2,1,0,1\nb,2,1,0\n").find("x.csv:2: m=2 needs 3 entries"), std::string::npos);
  EXPECT_NE(message("a,two,1\n").find("x.csv:1: bad matrix dimension"), std::string::npos);
  EXPECT_NE(message("a,1,z\n").find("cannot parse entry"), std::string::npos);
  EXPECT_NE(message("a,1\n").find("expected id, m"), std::string::npos);
  EXPECT_NE(message("# only\n").find("no matrices"), std::string::npos);
  EXPECT_THROW(hankel::read_matrix_csv(std::string("/nonexistent.csv")), hankel::input_error);
}
