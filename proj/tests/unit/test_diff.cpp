#include <catch2/catch_amalgamated.hpp>

#include <mgvga/diff/adam.hpp>
#include <mgvga/diff/checkpoint.hpp>
#include <mgvga/diff/gradient_check.hpp>
#include <mgvga/diff/ops.hpp>
#include <mgvga/util/random.hpp>

#include <filesystem>

using namespace mgvga;

namespace
{

using dmat = matrix<double>;

dmat random_matrix( rng& r, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0 )
{
  dmat m( rows, cols );
  for ( Eigen::Index i = 0; i < m.size(); ++i )
  {
    m.data()[i] = r.uniform( lo, hi );
  }
  return m;
}

/* scalar = sum(out .* W) for a fixed random W, so every output element matters */
var<double> weighted_sum( var<double> out, dmat const& w )
{
  return sum( hadamard( out, out.owner->constant( w ) ) );
}

template<class Build>
double check_op( std::uint64_t seed, std::vector<std::pair<Eigen::Index, Eigen::Index>> const& shapes, Build&& build,
                 Eigen::Index out_rows, Eigen::Index out_cols )
{
  rng r( seed );
  parameter_set<double> ps;
  for ( std::size_t i = 0; i < shapes.size(); ++i )
  {
    auto& p = ps.add( "p" + std::to_string( i ), shapes[i].first, shapes[i].second );
    p.value = random_matrix( r, shapes[i].first, shapes[i].second );
  }
  const dmat w = random_matrix( r, out_rows, out_cols );
  auto fn = [&]( tape<double>& t ) {
    std::vector<var<double>> in;
    for ( std::size_t i = 0; i < ps.size(); ++i )
    {
      in.push_back( t.param( ps[i] ) );
    }
    return weighted_sum( build( in ), w );
  };
  const auto rep = gradient_check( fn, ps.pointers(), 1e-5 );
  REQUIRE_FALSE( rep.any_nonfinite() );
  REQUIRE( rep.checked() > 0 );
  return rep.max_rel_error();
}

} // namespace

TEST_CASE( "every op passes a 64-bit gradient check on 10 seeds", "[diff][gradcheck]" )
{
  for ( std::uint64_t seed = 1; seed <= 10; ++seed )
  {
    INFO( "seed " << seed );
    CHECK( check_op( seed, { { 4, 3 }, { 3, 5 } }, []( auto in ) { return matmul( in[0], in[1] ); }, 4, 5 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 3 }, { 4, 3 } }, []( auto in ) { return add( in[0], in[1] ); }, 4, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 3 }, { 1, 3 } }, []( auto in ) { return add( in[0], in[1] ); }, 4, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 3 }, { 4, 3 } }, []( auto in ) { return sub( in[0], in[1] ); }, 4, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 3 } }, []( auto in ) { return scale( in[0], 2.5 ); }, 4, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 3 } }, []( auto in ) { return transpose( in[0] ); }, 3, 4 ) < 1e-6 );
    CHECK( check_op( seed, { { 5, 4 } }, []( auto in ) { return relu( in[0] ); }, 5, 4 ) < 1e-6 );
    CHECK( check_op( seed, { { 5, 6 }, { 1, 6 }, { 1, 6 } }, []( auto in ) { return layer_norm( in[0], in[1], in[2] ); }, 5, 6 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 5 } }, []( auto in ) { return row_softmax( in[0] ); }, 4, 5 ) < 1e-6 );
    CHECK( check_op( seed, { { 6, 3 } }, []( auto in ) { return mean_pool_rows( in[0] ); }, 1, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 6, 3 } }, []( auto in ) { return segment_mean_rows( in[0], { 0, 2, 6 } ); }, 2, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 5, 3 } }, []( auto in ) { return gather_rows( in[0], { 4, 0, 4, 2 } ); }, 4, 3 ) < 1e-6 );
    CHECK( check_op( seed, { { 4, 2 }, { 4, 3 } }, []( auto in ) { return concat_cols( in[0], in[1] ); }, 4, 5 ) < 1e-6 );
    CHECK( check_op( seed, { { 5, 3 }, { 1, 3 } }, []( auto in ) { return replace_rows( in[0], { 1, 3 }, in[1] ); }, 5, 3 ) < 1e-6 );
    {
      auto S = std::make_shared<sparse_matrix<double>>( 4, 5 );
      std::vector<Eigen::Triplet<double>> trip{ { 0, 1, 1.0 }, { 0, 3, 1.0 }, { 2, 4, 0.5 }, { 3, 0, 2.0 }, { 3, 1, 1.0 } };
      S->setFromTriplets( trip.begin(), trip.end() );
      std::shared_ptr<sparse_matrix<double> const> op = S;
      CHECK( check_op( seed, { { 5, 3 } }, [op]( auto in ) { return propagate( in[0], op ); }, 4, 3 ) < 1e-6 );
    }
    CHECK( check_op( seed, { { 5, 4 } }, []( auto in ) {
             return cross_entropy_rows( row_softmax( in[0] ), { 0, 3, 2, 1, 1 }, { 0, 2, 4 } );
           }, 1, 1 ) < 1e-6 );
    CHECK( check_op( seed, { { 5, 2 } }, []( auto in ) {
             dmat target = dmat::Constant( 5, 2, 0.5 );
             return squared_error( in[0], target, { 1, 2, 4 } );
           }, 1, 1 ) < 1e-6 );
  }
}

TEST_CASE( "matmul gradient matches central differences", "[diff]" )
{
  // independent oracle: perturb A directly and difference the raw products
  rng r( 77 );
  const dmat A = random_matrix( r, 3, 4 ), B = random_matrix( r, 4, 2 ), W = random_matrix( r, 3, 2 );
  parameter_set<double> ps;
  ps.add( "a", 3, 4 ).value = A;
  tape<double> t;
  auto out = sum( hadamard( matmul( t.param( ps[0] ), t.constant( B ) ), t.constant( W ) ) );
  t.backward( out );
  const double eps = 1e-5;
  for ( Eigen::Index i = 0; i < A.size(); ++i )
  {
    dmat ap = A, am = A;
    ap.data()[i] += eps;
    am.data()[i] -= eps;
    const double fd = ( ( ap * B ).cwiseProduct( W ).sum() - ( am * B ).cwiseProduct( W ).sum() ) / ( 2 * eps );
    CHECK( relative_error( ps[0].grad.data()[i], fd ) < 1e-6 );
  }
}

TEST_CASE( "gradient check trivial cases", "[diff][gradcheck]" )
{
  parameter_set<double> ps;
  auto& x = ps.add( "x", 2, 3 );
  x.value << 1.0, -2.0, 0.5, 3.0, 0.25, -1.5;
  const auto quad = gradient_check( [&]( tape<double>& t ) {
    auto v = t.param( x );
    return sum( hadamard( v, v ) );
  }, ps.pointers() );
  CHECK( quad.max_rel_error() < 1e-8 );
  for ( Eigen::Index i = 0; i < x.value.size(); ++i )
  {
    CHECK( x.grad.data()[i] == Catch::Approx( 2 * x.value.data()[i] ) );
  }

  const auto constant = gradient_check( [&]( tape<double>& t ) {
    (void)t.param( x );
    return t.constant( dmat::Constant( 1, 1, 4.0 ) );
  }, ps.pointers() );
  CHECK( constant.max_rel_error() == 0.0 );
  CHECK( x.grad.isZero() );
}

TEST_CASE( "gradient check flags non-finite values", "[diff][gradcheck]" )
{
  parameter_set<double> ps;
  auto& x = ps.add( "x", 1, 1 );
  x.value( 0, 0 ) = std::numeric_limits<double>::infinity();
  const auto rep = gradient_check( [&]( tape<double>& t ) { return sum( t.param( x ) ); }, ps.pointers() );
  CHECK( rep.any_nonfinite() );
}

TEST_CASE( "row_softmax rows are positive and sum to one", "[diff]" )
{
  rng r( 3 );
  tape<float> t;
  matrix<float> x( 8, 5 );
  for ( Eigen::Index i = 0; i < x.size(); ++i )
  {
    x.data()[i] = static_cast<float>( r.uniform( -30, 30 ) );
  }
  const auto y = row_softmax( t.constant( x ) ).value();
  for ( Eigen::Index i = 0; i < y.rows(); ++i )
  {
    CHECK( std::abs( y.row( i ).sum() - 1.0f ) < 1e-6f );
    CHECK( ( y.row( i ).array() > 0.0f ).all() );
  }
}

TEST_CASE( "relu zeroes negatives and blocks their gradient", "[diff]" )
{
  parameter_set<double> ps;
  auto& x = ps.add( "x", 1, 4 );
  x.value << -2.0, -0.5, 0.5, 2.0;
  tape<double> t;
  auto y = relu( t.param( x ) );
  CHECK( y.value()( 0, 0 ) == 0.0 );
  CHECK( y.value()( 0, 1 ) == 0.0 );
  CHECK( y.value()( 0, 3 ) == 2.0 );
  t.backward( sum( y ) );
  CHECK( x.grad( 0, 0 ) == 0.0 );
  CHECK( x.grad( 0, 1 ) == 0.0 );
  CHECK( x.grad( 0, 2 ) == 1.0 );
}

TEST_CASE( "shape errors name the op and shapes", "[diff]" )
{
  tape<float> t;
  auto a = t.constant( matrix<float>::Zero( 2, 3 ) );
  auto b = t.constant( matrix<float>::Zero( 2, 3 ) );
  try
  {
    matmul( a, b );
    FAIL( "expected shape_error" );
  }
  catch ( shape_error const& e )
  {
    const std::string msg = e.what();
    CHECK( msg.find( "matmul" ) != std::string::npos );
    CHECK( msg.find( "[2x3]" ) != std::string::npos );
  }
  CHECK_THROWS_AS( add( a, t.constant( matrix<float>::Zero( 3, 3 ) ) ), shape_error );
  CHECK_THROWS_AS( t.backward( a ), shape_error );
}

TEST_CASE( "forward passes are deterministic", "[diff]" )
{
  rng r( 5 );
  const dmat x = random_matrix( r, 6, 4 ), w = random_matrix( r, 4, 4 );
  auto run = [&] {
    tape<double> t;
    return row_softmax( relu( matmul( t.constant( x ), t.constant( w ) ) ) ).value();
  };
  CHECK( run() == run() );
}

TEST_CASE( "adam zero gradient without decay leaves params unchanged", "[adam]" )
{
  parameter_set<float> ps;
  auto& p = ps.add( "w", 2, 2 );
  p.value << 1, 2, 3, 4;
  const auto before = p.value;
  p.zero_grad();
  adam_state<float> st;
  adam_config cfg;
  cfg.weight_decay = 0.0;
  for ( int i = 0; i < 5; ++i )
  {
    adam_step( ps, st, cfg );
  }
  CHECK( p.value == before );
  CHECK( st.t == 5 );
}

TEST_CASE( "adam first step moves by about lr", "[adam]" )
{
  // hand-evaluated: m1 = 0.1, v1 = 0.001, m_hat = 1, v_hat = 1, step = lr / (1 + eps)
  parameter_set<double> ps;
  auto& p = ps.add( "w", 1, 1 );
  p.value( 0, 0 ) = 0.5;
  p.grad_buffer()( 0, 0 ) = 1.0;
  adam_state<double> st;
  adam_config cfg;
  cfg.weight_decay = 0.0;
  adam_step( ps, st, cfg );
  CHECK( p.value( 0, 0 ) == Catch::Approx( 0.5 - 0.001 / ( 1.0 + 1e-8 ) ).epsilon( 1e-12 ) );

  // decoupled weight decay adds lr * wd * p
  ps[0].value( 0, 0 ) = 0.5;
  adam_state<double> st2;
  adam_config cfg2;
  adam_step( ps, st2, cfg2 );
  CHECK( p.value( 0, 0 ) == Catch::Approx( 0.5 - 0.001 / ( 1.0 + 1e-8 ) - 0.001 * 0.01 * 0.5 ).epsilon( 1e-12 ) );
}

TEST_CASE( "adam runs are bit-identical", "[adam]" )
{
  auto run = [] {
    rng r( 9 );
    parameter_set<float> ps;
    auto& p = ps.add( "w", 3, 3 );
    adam_state<float> st;
    for ( int s = 0; s < 20; ++s )
    {
      for ( Eigen::Index i = 0; i < 9; ++i )
      {
        p.grad_buffer().data()[i] = static_cast<float>( r.uniform( -1, 1 ) );
      }
      adam_step( ps, st, adam_config{}, linear_schedule( 1e-3, s, 20 ) );
    }
    return std::make_pair( ps[0].value, st );
  };
  const auto a = run();
  const auto b = run();
  CHECK( a.first == b.first );
  CHECK( a.second == b.second );
}

TEST_CASE( "linear schedule", "[adam]" )
{
  CHECK( linear_schedule( 1e-3, 0, 100 ) == 1e-3 );
  CHECK( linear_schedule( 1e-3, 50, 100 ) == Catch::Approx( 5e-4 ) );
  CHECK( linear_schedule( 1e-3, 100, 100 ) == 0.0 );
  CHECK( linear_schedule( 1e-3, 150, 100 ) == 0.0 );
}

TEST_CASE( "checkpoint round trip", "[checkpoint]" )
{
  rng r( 1 );
  parameter_set<float> ps;
  for ( int k = 0; k < 3; ++k )
  {
    auto& p = ps.add( "t" + std::to_string( k ), k + 1, 4 );
    for ( Eigen::Index i = 0; i < p.value.size(); ++i )
    {
      p.value.data()[i] = static_cast<float>( r.uniform( -3, 3 ) );
    }
  }
  const auto bytes = serialize_checkpoint( ps, { { "epoch", 3 } } );
  CHECK( bytes.substr( 0, 8 ) == "MGVGACKP" );
  const auto back = deserialize_checkpoint( bytes );
  REQUIRE( back.params.size() == 3 );
  for ( std::size_t i = 0; i < 3; ++i )
  {
    CHECK( back.params[i].name == ps[i].name );
    CHECK( back.params[i].value == ps[i].value );
  }
  CHECK( back.meta.at( "epoch" ) == 3 );
  CHECK( serialize_checkpoint( back.params, back.meta ) == bytes );

  const auto dir = std::filesystem::temp_directory_path() / "mgvga_ckpt_test";
  save_checkpoint( dir / "a.ckpt", ps );
  CHECK( load_checkpoint( dir / "a.ckpt" ).params[2].value == ps[2].value );
  std::filesystem::remove_all( dir );

  CHECK_THROWS_AS( deserialize_checkpoint( "garbage" ), checkpoint_error );
  CHECK_THROWS_AS( deserialize_checkpoint( bytes.substr( 0, bytes.size() - 1 ) ), checkpoint_error );
}
