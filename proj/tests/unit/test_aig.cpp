#include <catch2/catch_amalgamated.hpp>

#include <mgvga/aig/aig_graph.hpp>
#include <mgvga/aig/aiger.hpp>
#include <mgvga/aig/augment.hpp>
#include <mgvga/aig/cone.hpp>
#include <mgvga/aig/isomorphism.hpp>
#include <mgvga/aig/random_aig.hpp>
#include <mgvga/aig/simulation.hpp>

#include <functional>
#include <numeric>
#include <map>

using namespace mgvga;

namespace
{

/* naive per-assignment evaluator, independent of the bit-parallel simulator */
bool eval_node( aig_graph const& g, node_id v, std::uint64_t assignment, std::map<node_id, bool>& memo )
{
  if ( auto it = memo.find( v ); it != memo.end() )
  {
    return it->second;
  }
  bool r = false;
  std::vector<std::pair<node_id, int>> ins;
  for ( auto const& e : g.edges )
  {
    if ( e.dst == v )
    {
      ins.emplace_back( e.src, e.multiplicity );
    }
  }
  switch ( g.types[v] )
  {
  case node_type::pi:
  {
    if ( auto c = g.constant_value( v ) )
    {
      r = *c;
    }
    else
    {
      const auto idx = std::find( g.pis.begin(), g.pis.end(), v ) - g.pis.begin();
      r = ( assignment >> idx ) & 1;
    }
    break;
  }
  case node_type::po:
    r = eval_node( g, ins.at( 0 ).first, assignment, memo );
    break;
  case node_type::not_gate:
    r = !eval_node( g, ins.at( 0 ).first, assignment, memo );
    break;
  case node_type::and_gate:
    r = true;
    for ( auto const& [s, m] : ins )
    {
      r = r && eval_node( g, s, assignment, memo );
    }
    break;
  default:
    throw std::logic_error( "masked" );
  }
  memo[v] = r;
  return r;
}

bool naive_value( aig_graph const& g, node_id v, std::uint64_t a )
{
  std::map<node_id, bool> memo;
  return eval_node( g, v, a, memo );
}

aig_graph and2()
{
  aig_graph g;
  const auto a = g.add_pi();
  const auto b = g.add_pi();
  const auto n = g.add_node( node_type::and_gate );
  g.add_edge( a, n );
  g.add_edge( b, n );
  g.add_po( n );
  return g;
}

aig_graph or2()
{
  aig_graph g;
  const auto a = g.add_pi();
  const auto b = g.add_pi();
  const auto na = g.add_node( node_type::not_gate );
  const auto nb = g.add_node( node_type::not_gate );
  g.add_edge( a, na );
  g.add_edge( b, nb );
  const auto n = g.add_node( node_type::and_gate );
  g.add_edge( na, n );
  g.add_edge( nb, n );
  const auto o = g.add_node( node_type::not_gate );
  g.add_edge( n, o );
  g.add_po( o );
  return g;
}

} // namespace

TEST_CASE( "parse ascii AND of two inputs", "[aiger]" )
{
  const auto g = parse_aiger( "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n", aiger_format::ascii );
  CHECK( g.count( node_type::pi ) == 2 );
  CHECK( g.count( node_type::and_gate ) == 1 );
  CHECK( g.count( node_type::po ) == 1 );
  CHECK( g.count( node_type::not_gate ) == 0 );
  CHECK( validate( g ).ok() );
}

TEST_CASE( "complemented output adds one NOT between AND and PO", "[aiger]" )
{
  const auto g = parse_aiger( "aag 3 2 0 1 1\n2\n4\n7\n6 2 4\n", aiger_format::ascii );
  CHECK( g.count( node_type::not_gate ) == 1 );
  CHECK( g.size() == 5 );
  adjacency adj( g );
  const auto po = g.pos.at( 0 );
  const auto drv = adj.fanins( po )[0].node;
  CHECK( g.types[drv] == node_type::not_gate );
  CHECK( g.types[adj.fanins( drv )[0].node] == node_type::and_gate );
}

TEST_CASE( "empty header gives empty graph", "[aiger]" )
{
  const auto g = parse_aiger( "aag 0 0 0 0 0\n", aiger_format::ascii );
  CHECK( g.size() == 0 );
  CHECK( write_aiger( g, aiger_format::ascii ) == "aag 0 0 0 0 0\n" );
  CHECK( write_aiger( g, aiger_format::binary ) == "aig 0 0 0 0 0\n" );
}

TEST_CASE( "one NOT node per distinct complemented literal", "[aiger]" )
{
  // ~a used by two gates and one output: still a single NOT node
  const auto g = parse_aiger( "aag 5 2 0 2 2\n2\n4\n8\n3\n6 3 4\n8 3 6\n", aiger_format::ascii );
  CHECK( g.count( node_type::not_gate ) == 1 );
  CHECK( validate( g ).ok() );
}

TEST_CASE( "parse errors carry byte offsets", "[aiger]" )
{
  auto offset_of = []( std::string const& text ) -> std::optional<std::size_t> {
    try
    {
      parse_aiger( text );
    }
    catch ( aiger_error const& e )
    {
      return e.offset();
    }
    return std::nullopt;
  };
  CHECK( offset_of( "xyz 1 2 3\n" ) == 0u );
  CHECK( offset_of( "aag 3 2 0 1\n" ).has_value() );
  // latch
  CHECK( offset_of( "aag 3 1 1 1 0\n2\n4 2\n4\n" ).has_value() );
  // dangling literal 10 in the AND line starting at byte 20
  const auto d = offset_of( "aag 5 2 0 1 1\n2\n4\n6\n6 2 10\n" );
  REQUIRE( d.has_value() );
  CHECK( *d == 20u );
  // literal out of range
  CHECK( offset_of( "aag 3 2 0 1 1\n2\n4\n6\n6 2 40\n" ).has_value() );
  // cycle
  CHECK( offset_of( "aag 4 1 0 1 2\n2\n6\n6 2 8\n8 2 6\n" ).has_value() );
  // format mismatch
  CHECK_THROWS_AS( parse_aiger( "aag 0 0 0 0 0\n", aiger_format::binary ), aiger_error );
}

TEST_CASE( "ascii ANDs may appear out of order", "[aiger]" )
{
  const auto g = parse_aiger( "aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 5\n", aiger_format::ascii );
  CHECK( validate( g ).ok() );
  const auto tt = truth_table_of( g );
  // out = a & (a & ~b) = a & ~b: true only for a=1,b=0 (assignment 1)
  CHECK( tt.bit( 0, 0 ) == false );
  CHECK( tt.bit( 0, 1 ) == true );
  CHECK( tt.bit( 0, 2 ) == false );
  CHECK( tt.bit( 0, 3 ) == false );
}

TEST_CASE( "constant literals become pinned PIs", "[aiger]" )
{
  const auto g = parse_aiger( "aag 1 1 0 2 0\n2\n0\n3\n", aiger_format::ascii );
  CHECK( validate( g ).ok() );
  CHECK( g.constants.size() == 1 );
  const auto tt = truth_table_of( g );
  CHECK( tt.bit( 0, 0 ) == false );
  CHECK( tt.bit( 0, 1 ) == false );
  CHECK( tt.bit( 1, 0 ) == true );
  CHECK( tt.bit( 1, 1 ) == false );
  const auto back = parse_aiger( write_aiger( g, aiger_format::ascii ) );
  CHECK( isomorphic( g, back ) );
}

TEST_CASE( "round trip of the AND circuit is byte identical", "[aiger]" )
{
  const std::string text = "aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n";
  const auto g = parse_aiger( text );
  CHECK( write_aiger( g, aiger_format::ascii ) == text );
  const auto bin = write_aiger( g, aiger_format::binary );
  CHECK( write_aiger( parse_aiger( bin, aiger_format::binary ), aiger_format::binary ) == bin );
  CHECK( isomorphic( g, parse_aiger( bin ) ) );
}

TEST_CASE( "writer collapses NOT chains of length two", "[aiger]" )
{
  aig_graph g;
  const auto a = g.add_pi();
  const auto b = g.add_pi();
  const auto n1 = g.add_node( node_type::not_gate );
  const auto n2 = g.add_node( node_type::not_gate );
  g.add_edge( a, n1 );
  g.add_edge( n1, n2 );
  const auto x = g.add_node( node_type::and_gate );
  g.add_edge( n2, x );
  g.add_edge( b, x );
  g.add_po( x );
  REQUIRE( validate( g ).ok() );
  const auto text = write_aiger( g, aiger_format::ascii );
  CHECK( text == "aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n" );
  const auto back = parse_aiger( text );
  CHECK( back.count( node_type::not_gate ) == 0 );
  CHECK( equivalent( g, back ).verdict == equivalence_verdict::equivalent );
}

TEST_CASE( "writer rejects MASKED nodes", "[aiger]" )
{
  auto g = and2();
  g.types[2] = node_type::masked;
  CHECK_THROWS_AS( write_aiger( g, aiger_format::ascii ), graph_error );
}

TEST_CASE( "symbol tables survive a round trip", "[aiger]" )
{
  const std::string text = "aag 3 2 0 1 1\n2\n4\n6\n6 4 2\ni0 a\ni1 b\no0 y\nc\nsome comment\n";
  const auto g = parse_aiger( text );
  REQUIRE( g.pi_names == std::vector<std::string>{ "a", "b" } );
  REQUIRE( g.po_names == std::vector<std::string>{ "y" } );
  const auto back = parse_aiger( write_aiger( g, aiger_format::binary ) );
  CHECK( back.pi_names == g.pi_names );
  CHECK( back.po_names == g.po_names );
}

TEST_CASE( "parse after write is isomorphic for random graphs", "[aiger][property]" )
{
  for ( std::uint64_t seed = 0; seed < 200; ++seed )
  {
    const auto g = random_aig( 1 + seed % 9, static_cast<std::uint32_t>( seed % 60 ), seed );
    for ( auto fmt : { aiger_format::ascii, aiger_format::binary } )
    {
      const auto bytes = write_aiger( g, fmt );
      const auto h = parse_aiger( bytes, fmt );
      INFO( "seed " << seed );
      CHECK( isomorphic( g, h ) );
      CHECK( write_aiger( h, fmt ) == bytes );
    }
  }
}

TEST_CASE( "isomorphism distinguishes different structures", "[iso]" )
{
  CHECK( isomorphic( and2(), and2() ) );
  CHECK_FALSE( isomorphic( and2(), or2() ) );
  auto swapped = and2();
  std::swap( swapped.pis[0], swapped.pis[1] );
  CHECK( isomorphic( and2(), swapped ) );
}

TEST_CASE( "validate reports structural violations", "[validate]" )
{
  CHECK( validate( and2() ).ok() );

  auto three = and2();
  const auto c = three.add_pi();
  three.add_edge( c, 2 );
  const auto r1 = validate( three );
  CHECK( r1.count( violation_kind::degree ) == 1 );
  REQUIRE( !r1.violations.empty() );
  CHECK( r1.violations[0].node == node_id{ 2 } );

  auto loop = and2();
  loop.edges[0] = { 2, 2, 1 };
  CHECK( validate( loop ).count( violation_kind::cycle ) >= 1 );

  auto dangling = and2();
  dangling.add_edge( 0, 99 );
  CHECK( validate( dangling ).count( violation_kind::dangling_edge ) == 1 );
}

TEST_CASE( "truth tables of basic gates", "[sim]" )
{
  const auto t = truth_table_of( and2() );
  CHECK( t.bit_count() == 4 );
  CHECK( t.outputs[0][0] == 0b1000 );

  aig_graph n;
  const auto a = n.add_pi();
  const auto x = n.add_node( node_type::not_gate );
  n.add_edge( a, x );
  n.add_po( x );
  CHECK( truth_table_of( n ).outputs[0][0] == 0b01 );
}

TEST_CASE( "truth table of a graph with itself", "[sim]" )
{
  const auto g = random_aig( 8, 64, 7 );
  CHECK( truth_table_of( g ) == truth_table_of( g ) );
  CHECK( truth_table_of( g ).bit_count() == g.pos.size() * 256 );
}

TEST_CASE( "bit-parallel simulation matches the naive evaluator", "[sim][property]" )
{
  for ( std::uint64_t seed = 0; seed < 30; ++seed )
  {
    const auto g = random_aig( 5, 30, 100 + seed );
    const auto values = simulate_nodes( g, exhaustive_patterns( 5 ) );
    for ( node_id v = 0; v < g.size(); ++v )
    {
      for ( std::uint64_t a = 0; a < 32; ++a )
      {
        REQUIRE( ( ( values[v][0] >> a ) & 1 ) == naive_value( g, v, a ) );
      }
    }
  }
}

TEST_CASE( "exhaustive mode caps at 16 PIs", "[sim]" )
{
  const auto g = random_aig( 17, 10, 1 );
  CHECK_THROWS_AS( truth_table_of( g ), capacity_error );
  CHECK_NOTHROW( truth_table_of( g, simulation_mode::sampled( 100, 1 ) ) );
}

TEST_CASE( "equivalence verdicts", "[equiv]" )
{
  const auto r = equivalent( and2(), or2() );
  CHECK( r.verdict == equivalence_verdict::inequivalent );
  CHECK( r.witness_string() == "01" );

  CHECK( equivalent( and2(), and2() ).verdict == equivalence_verdict::equivalent );

  const auto g = random_aig( 20, 50, 3 );
  const auto s = equivalent( g, g, simulation_mode::sampled( 10000, 5 ) );
  CHECK( s.verdict == equivalence_verdict::unknown );

  CHECK_THROWS_AS( equivalent( and2(), random_aig( 3, 4, 1 ) ), graph_error );
}

TEST_CASE( "sampled mode finds a witness for different functions", "[equiv]" )
{
  const auto s = equivalent( and2(), or2(), simulation_mode::sampled( 64, 9 ) );
  REQUIRE( s.verdict == equivalence_verdict::inequivalent );
  const std::uint64_t a = ( s.witness[0] ? 1 : 0 ) | ( s.witness[1] ? 2 : 0 );
  CHECK( naive_value( and2(), 3, a ) != naive_value( or2(), 6, a ) );
}

TEST_CASE( "name matching aligns permuted inputs", "[equiv]" )
{
  auto g1 = parse_aiger( "aag 3 2 0 1 1\n2\n4\n6\n6 4 3\ni0 a\ni1 b\no0 y\n" );
  auto g2 = parse_aiger( "aag 3 2 0 1 1\n2\n4\n6\n6 5 2\ni0 b\ni1 a\no0 y\n" );
  CHECK( equivalent( g1, g2 ).verdict == equivalence_verdict::inequivalent );
  CHECK( equivalent( g1, g2, simulation_mode::exhaustive(), terminal_matching::by_name ).verdict ==
         equivalence_verdict::equivalent );
}

TEST_CASE( "buffer insertion", "[augment]" )
{
  const auto g = random_aig( 6, 40, 11 );
  CHECK( insert_buffers( g, 0.0, 5 ) == g );

  const auto e = num_bufferable_edges( g );
  const auto full = insert_buffers( g, 1.0, 5 );
  CHECK( full.size() == g.size() + e );
  CHECK( full.count( node_type::and_gate ) == g.count( node_type::and_gate ) + e );
  CHECK( validate( full ).ok() );

  CHECK_THROWS( insert_buffers( g, 1.5, 0 ) );
  CHECK_THROWS( insert_buffers( g, -0.1, 0 ) );
}

TEST_CASE( "buffer insertion preserves the truth table", "[augment][property]" )
{
  for ( std::uint64_t seed = 0; seed < 200; ++seed )
  {
    const auto g = random_aig( 1 + seed % 10, static_cast<std::uint32_t>( seed % 80 ), seed );
    const double p = static_cast<double>( seed % 11 ) / 10.0;
    const auto h = insert_buffers( g, p, seed * 31 );
    REQUIRE( validate( h ).ok() );
    REQUIRE( truth_table_of( h ) == truth_table_of( g ) );
    REQUIRE( equivalent( g, h ).verdict == equivalence_verdict::equivalent );
  }
}

TEST_CASE( "degrees count buffer multiplicity", "[degrees]" )
{
  const auto g = and2();
  const auto d = degrees( g );
  CHECK( d.in[2] == 2 );
  CHECK( d.in[0] == 0 );
  CHECK( d.out[3] == 0 );

  const auto b = insert_buffers( g, 1.0, 0 );
  const auto db = degrees( b );
  for ( node_id v = 4; v < b.size(); ++v )
  {
    CHECK( db.in[v] == 2 );
  }
}

TEST_CASE( "degree sums equal total edge multiplicity", "[degrees][property]" )
{
  for ( std::uint64_t seed = 0; seed < 50; ++seed )
  {
    const auto g = insert_buffers( random_aig( 4, 30, seed ), 0.3, seed );
    const auto d = degrees( g );
    std::size_t total = 0;
    for ( auto const& e : g.edges )
    {
      total += e.multiplicity;
    }
    CHECK( std::accumulate( d.in.begin(), d.in.end(), std::size_t{ 0 } ) == total );
    CHECK( std::accumulate( d.out.begin(), d.out.end(), std::size_t{ 0 } ) == total );
  }
}

TEST_CASE( "cone of a PI is a wire", "[cone]" )
{
  const auto c = extract_cone( and2(), 0 );
  CHECK( c.members == std::vector<node_id>{ 0 } );
  CHECK( c.extracted.size() == 2 );
  CHECK( truth_table_of( c.extracted ).outputs[0][0] == 0b10 );
  CHECK_THROWS_AS( extract_cone( and2(), 42 ), graph_error );
}

TEST_CASE( "cone of the top AND is the whole circuit", "[cone]" )
{
  const auto c = extract_cone( and2(), 2 );
  CHECK( c.members == std::vector<node_id>{ 0, 1, 2 } );
  CHECK( truth_table_of( c.extracted ) == truth_table_of( and2() ) );
}

TEST_CASE( "cone truth tables match the root signal", "[cone][property]" )
{
  for ( std::uint64_t seed = 0; seed < 40; ++seed )
  {
    const auto g = random_aig( 1 + seed % 10, 50, seed );
    const auto n = static_cast<std::uint32_t>( g.pis.size() );
    const auto full = simulate_nodes( g, exhaustive_patterns( n ) );
    for ( node_id root = 0; root < g.size(); ++root )
    {
      const auto c = extract_cone( g, root );
      REQUIRE( validate( c.extracted ).ok() );
      const auto tt = truth_table_of( c.extracted );
      for ( std::uint64_t a = 0; a < ( 1ull << n ); ++a )
      {
        std::uint64_t sub = 0;
        for ( std::size_t i = 0; i < c.pi_origin.size(); ++i )
        {
          const auto orig_idx = std::find( g.pis.begin(), g.pis.end(), c.pi_origin[i] ) - g.pis.begin();
          sub |= ( ( a >> orig_idx ) & 1 ) << i;
        }
        REQUIRE( tt.bit( 0, sub ) == ( ( full[root][a / 64] >> ( a % 64 ) ) & 1 ) );
      }
    }
  }
}

TEST_CASE( "random_aig basics", "[random]" )
{
  const auto g = random_aig( 2, 0, 4 );
  CHECK( g.count( node_type::pi ) == 2 );
  CHECK( g.count( node_type::po ) == 2 );
  CHECK( g.edges.size() == 2 );
  CHECK( random_aig( 5, 30, 9 ) == random_aig( 5, 30, 9 ) );
  CHECK_FALSE( random_aig( 5, 30, 9 ) == random_aig( 5, 30, 10 ) );
}

TEST_CASE( "random_aig graphs always validate", "[random][property]" )
{
  for ( std::uint64_t seed = 0; seed < 1000; ++seed )
  {
    REQUIRE( validate( random_aig( 8, 64, seed ) ).ok() );
  }
}

TEST_CASE( "json dump round trip", "[json]" )
{
  const auto g = insert_buffers( random_aig( 4, 20, 3 ), 0.5, 1 );
  CHECK( graph_from_json( to_json( g ) ) == g );
}
