#include <catch2/catch_amalgamated.hpp>

#include <mgvga/aig/simulation.hpp>
#include <mgvga/exact/bench.hpp>
#include <mgvga/exact/bounds.hpp>
#include <mgvga/exact/synthesis.hpp>

#include "../support/exact_oracle.hpp"

#include <set>

using namespace mgvga;

namespace
{

std::uint64_t binomial( std::uint64_t n, std::uint64_t k )
{
  std::uint64_t r = 1;
  for ( std::uint64_t i = 1; i <= k; ++i )
  {
    r = r * ( n - k + i ) / i;
  }
  return r;
}

std::uint32_t graph_function( aig_graph const& g )
{
  const auto t = truth_table_of( g );
  return static_cast<std::uint32_t>( t.outputs[0][0] & ( ( 1ull << t.num_assignments ) - 1 ) );
}

} // namespace

TEST_CASE( "fence enumeration", "[exact]" )
{
  const auto f32 = enumerate_fences( 3, 2 );
  REQUIRE( f32.size() == 2 );
  CHECK( f32[0].parts == std::vector<std::uint32_t>{ 1, 2 } );
  CHECK( f32[1].parts == std::vector<std::uint32_t>{ 2, 1 } );
  CHECK( f32[0].to_string() == "(1,2)" );
  CHECK( enumerate_fences( 5, 1 ).size() == 1 );
  CHECK( enumerate_fences( 5, 1 )[0].parts == std::vector<std::uint32_t>{ 5 } );
  CHECK( enumerate_fences( 2, 3 ).empty() );
  CHECK( enumerate_fences( 3, 0 ).empty() );

  for ( std::uint32_t n = 1; n <= 8; ++n )
  {
    std::set<fence> all;
    for ( std::uint32_t l = 1; l <= n; ++l )
    {
      const auto fs = enumerate_fences( n, l );
      REQUIRE( fs.size() == binomial( n - 1, l - 1 ) );
      REQUIRE( std::is_sorted( fs.begin(), fs.end() ) );
      for ( auto const& f : fs )
      {
        REQUIRE( f.nodes() == n );
        REQUIRE( f.levels() == l );
        REQUIRE( std::count( f.parts.begin(), f.parts.end(), 0u ) == 0 );
        all.insert( f );
      }
    }
    const auto every = enumerate_all_fences( n );
    REQUIRE( every.size() == ( 1u << ( n - 1 ) ) );
    REQUIRE( std::is_sorted( every.begin(), every.end() ) );
    REQUIRE( std::set<fence>( every.begin(), every.end() ) == all );
    REQUIRE( every.front().levels() == n );
  }
}

TEST_CASE( "truth table helpers", "[exact]" )
{
  CHECK( tt_projection( 0, 3 ) == 0xaa );
  CHECK( tt_projection( 1, 3 ) == 0xcc );
  CHECK( tt_projection( 2, 3 ) == 0xf0 );
  CHECK( tt_from_hex( "0x96", 3 ) == 0x96 );
  CHECK( tt_from_hex( "E8", 3 ) == 0xe8 );
  CHECK( tt_from_hex( "6", 2 ) == 6 );
  CHECK( tt_to_hex( 0x6, 2 ) == "6" );
  CHECK( tt_to_hex( 0x0e, 3 ) == "0e" );
  CHECK_THROWS_AS( tt_from_hex( "1ff", 3 ), exact_error );
  CHECK_THROWS_AS( tt_from_hex( "zz", 3 ), exact_error );
  CHECK_THROWS_AS( tt_from_hex( "12", 4 ), exact_error );

  // 256 minus the functions of at most two of the three inputs
  CHECK( nondegenerate_functions( 3 ).size() == 218 );
  CHECK( nondegenerate_functions( 2 ).size() == 10 );
  CHECK( tt_degenerate( 0xaa, 3 ) );
  CHECK_FALSE( tt_degenerate( 0x80, 3 ) );

  for ( std::uint32_t f = 0; f < 256; ++f )
  {
    const auto c = npn_canonize( f, 3 );
    REQUIRE( npn_apply( f, 3, c.transform ) == c.representative );
    REQUIRE( c.representative <= f );
    // members of one class share the representative
    REQUIRE( npn_canonize( c.representative, 3 ).representative == c.representative );
  }
}

TEST_CASE( "exact synthesis of primitives", "[exact]" )
{
  const auto a = exact_synthesize( 0x8, 2 );
  CHECK( a.feasible );
  CHECK( a.size() == 1 );
  CHECK( a.levels() == 1 );

  const auto x = exact_synthesize( 0x6, 2 );
  CHECK( x.size() == 3 );
  CHECK( x.levels() == 2 );
  CHECK( x.circuit.simulate() == 0x6 );
  CHECK( graph_function( x.circuit.to_graph() ) == 0x6 );

  const auto p = exact_synthesize( 0x5, 2 ); /* NOT x0 */
  CHECK( p.size() == 0 );
  CHECK_FALSE( p.used_fence );

  CHECK_THROWS_AS( exact_synthesize( 0x0, 2 ), exact_error );
  CHECK_THROWS_AS( exact_synthesize( 0xff, 3 ), exact_error );
  CHECK_THROWS_AS( exact_synthesize( 0x6, 4 ), exact_error );
  CHECK_THROWS_AS( exact_synthesize( 0x1ff, 3 ), exact_error );

  // fence constraints
  CHECK( exact_synthesize( 0x6, 2, 8, fence{ { 2, 1 } } ).feasible );
  CHECK_FALSE( exact_synthesize( 0x6, 2, 8, fence{ { 1, 1 } } ).feasible );
  CHECK_FALSE( exact_synthesize( 0x6, 2, 8, fence{ { 1, 2 } } ).feasible );
  CHECK_FALSE( exact_synthesize( 0x6, 2, 2 ).feasible );
  CHECK_THROWS_AS( exact_synthesize( 0x6, 2, 8, fence{ { 0, 1 } } ), exact_error );
}

TEST_CASE( "exact sizes match brute force on every 3-input function", "[exact]" )
{
  const auto best3 = oracle::min_sizes( 3, 6 );
  const auto best2 = oracle::min_sizes( 2, 4 );
  for ( std::uint32_t f = 1; f < 255; ++f )
  {
    const auto r = exact_synthesize( f, 3 );
    REQUIRE( r.feasible );
    REQUIRE( static_cast<int>( r.size() ) == best3[f] );
    REQUIRE( r.circuit.simulate() == f );
    REQUIRE( graph_function( r.circuit.to_graph() ) == f );
    REQUIRE( r.circuit.depth() == r.levels() );
  }
  for ( std::uint32_t f = 1; f < 15; ++f )
  {
    REQUIRE( static_cast<int>( exact_synthesize( f, 2 ).size() ) == best2[f] );
  }
  // the hardest functions of three inputs
  CHECK( exact_synthesize( 0x96, 3 ).size() == 6 );
  CHECK( exact_synthesize( 0xe8, 3 ).size() == 4 );
}

TEST_CASE( "fence-guided search", "[exact]" )
{
  const auto report = run_exact_bench( nondegenerate_functions( 3 ), 3, exact_bounds );
  CHECK( report.rows.size() == 218 );
  CHECK( report.size_mismatches() == 0 );
  CHECK( report.guided_not_worse() == 218 );
  CHECK( report.fallbacks() == 0 );
  // strictly fewer exactly when the optimum is shallower than its size
  for ( auto const& r : report.rows )
  {
    const bool shallower = r.unconstrained.levels() < r.unconstrained.size();
    REQUIRE( ( r.guided.stats.fences_explored < r.unconstrained.stats.fences_explored ) == shallower );
    REQUIRE( r.guided.circuit.simulate() == r.target );
  }
  CHECK( report.guided_strictly_fewer() * 2 >= report.rows.size() );

  // bounds that are too tight fall back and stay optimal
  const auto g = fence_guided_search( 0x96, 3, { 2, 1 } );
  CHECK( g.stats.fallback );
  CHECK( g.size() == 6 );
  const auto u = exact_synthesize( 0x96, 3 );
  CHECK( g.stats.fences_explored == u.stats.fences_explored );

  const auto csv = report.to_csv();
  CHECK( csv.rfind( "target,mode,fences_explored,candidates,micros,size,levels", 0 ) == 0 );
  CHECK( std::count( csv.begin(), csv.end(), '\n' ) == 1 + 2 * 218 );
  CHECK( report.summary()["targets"] == 218 );
}

TEST_CASE( "bound prediction", "[exact]" )
{
  model_config cfg;
  cfg.d = 12;
  cfg.d_v = 8;
  cfg.encoder_layers = 3;
  cfg.decoder_layers = 1;
  auto ps = init_model<float>( cfg, 8 );

  const auto g = function_graph( 0xe8, 3 );
  CHECK( graph_function( g ) == 0xe8 );
  CHECK_THROWS_AS( function_graph( 0, 3 ), exact_error );

  // zero weights: the rounded-up bias
  bound_head zero{ mlp_regressor::zeros( cfg.d, 4, 2 ), graph_pooling::mean };
  zero.mlp.params.get( "mlp.b2" ).value << 2.3, -1.0;
  const auto z = predict_bounds( g, ps, cfg, zero, 0, 0 );
  CHECK( z.nodes == 3 );
  CHECK( z.levels == 0 );
  const auto zs = predict_bounds( g, ps, cfg, zero );
  CHECK( zs.bounds().nodes == 4 );
  CHECK( zs.bounds().levels == 1 );
  CHECK( zs.bounds().nodes >= z.bounds().nodes );
  CHECK( zs.bounds().levels >= z.bounds().levels );

  // memorize 30 cones
  const auto targets = nondegenerate_functions( 3 );
  std::vector<bound_sample> samples;
  for ( std::size_t i = 0; i < 30; ++i )
  {
    const auto t = targets[i * 7];
    const auto r = exact_synthesize( t, 3 );
    samples.push_back( { function_graph( t, 3 ), r.size(), r.levels() } );
  }
  const auto head = train_bound_head( samples, ps, cfg );
  std::size_t exact = 0;
  for ( auto const& s : samples )
  {
    const auto p = predict_bounds( s.graph, ps, cfg, head, 0, 0 );
    exact += p.nodes == s.nodes && p.levels == s.levels ? 1 : 0;
  }
  CHECK( exact >= 27 );
  CHECK_THROWS_AS( train_bound_head( {}, ps, cfg ), eval_error );
}
