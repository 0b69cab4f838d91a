#include <catch2/catch_amalgamated.hpp>

#include <mgvga/aig/aiger.hpp>
#include <mgvga/aig/random_aig.hpp>
#include <mgvga/gnn/model.hpp>

#include <numeric>

using namespace mgvga;

namespace
{

aig_graph permute( aig_graph const& g, std::vector<node_id> const& p )
{
  aig_graph h;
  h.name = g.name;
  h.types.resize( g.size() );
  for ( node_id v = 0; v < g.size(); ++v )
  {
    h.types[p[v]] = g.types[v];
  }
  for ( auto const& e : g.edges )
  {
    h.edges.push_back( { p[e.src], p[e.dst], e.multiplicity } );
  }
  for ( auto v : g.pis )
  {
    h.pis.push_back( p[v] );
  }
  for ( auto v : g.pos )
  {
    h.pos.push_back( p[v] );
  }
  return h;
}

model_config small_config()
{
  model_config c;
  c.d = 16;
  c.d_v = 8;
  return c;
}

matrix<float> encode_graph( parameter_set<float>& ps, aig_graph const& g, aggregation agg = aggregation::sum )
{
  tape<float> t;
  const auto gt = make_graph_tensors<float>( g, agg );
  return encode( t, ps, gt ).value();
}

std::vector<std::vector<float>> sorted_rows( matrix<float> const& m )
{
  std::vector<std::vector<float>> rows;
  for ( Eigen::Index r = 0; r < m.rows(); ++r )
  {
    rows.emplace_back( m.row( r ).data(), m.row( r ).data() + m.cols() );
  }
  std::sort( rows.begin(), rows.end() );
  return rows;
}

} // namespace

TEST_CASE( "default model size", "[gnn]" )
{
  const auto ps = init_model<float>( model_config{}, 1 );
  const auto n = graph_model_parameter_count( ps );
  INFO( "graph model parameters " << n << ", total " << ps.num_elements() );
  CHECK( n > 100000 );
  CHECK( n < 140000 );
  CHECK( ps.get( "type_embedding" ).value.rows() == 5 );
  CHECK( ps.get( "attention.w_k" ).value.rows() == 256 );
  CHECK( ps.get( "mask_token" ).value.isZero() );
  CHECK( ps.find( "encoder.6.w_self" ) != nullptr );
  CHECK( ps.find( "encoder.7.w_self" ) == nullptr );
  CHECK( ps.find( "decoder.1.w_in" ) != nullptr );
}

TEST_CASE( "encoding an empty graph", "[gnn]" )
{
  auto ps = init_model<float>( small_config(), 1 );
  const auto x = encode_graph( ps, aig_graph{} );
  CHECK( x.rows() == 0 );
  CHECK( x.cols() == 16 );
  tape<float> t;
  const auto gt = make_graph_tensors<float>( aig_graph{}, aggregation::sum );
  CHECK( decode( t, ps, t.constant( matrix<float>( 0, 16 ) ), gt ).rows() == 0 );
}

TEST_CASE( "encoder is permutation equivariant", "[gnn][property]" )
{
  auto ps = init_model<float>( small_config(), 2 );
  for ( std::uint64_t seed = 0; seed < 10; ++seed )
  {
    const auto g = random_aig( 5, 40, seed );
    std::vector<node_id> p( g.size() );
    std::iota( p.begin(), p.end(), 0u );
    rng r( seed );
    r.shuffle( p.begin(), p.end() );
    const auto h = permute( g, p );
    REQUIRE( validate( h ).ok() );
    for ( auto agg : { aggregation::sum, aggregation::mean } )
    {
      const auto x = encode_graph( ps, g, agg );
      const auto y = encode_graph( ps, h, agg );
      for ( node_id v = 0; v < g.size(); ++v )
      {
        REQUIRE( ( x.row( v ) - y.row( p[v] ) ).cwiseAbs().maxCoeff() < 1e-5f );
      }
    }
  }
}

TEST_CASE( "isomorphic graphs give equal embedding multisets", "[gnn]" )
{
  auto ps = init_model<float>( small_config(), 3 );
  const auto g = random_aig( 6, 50, 17 );
  const auto h = parse_aiger( write_aiger( g, aiger_format::binary ) );
  const auto a = sorted_rows( encode_graph( ps, g ) );
  const auto b = sorted_rows( encode_graph( ps, h ) );
  REQUIRE( a.size() == b.size() );
  for ( std::size_t i = 0; i < a.size(); ++i )
  {
    for ( std::size_t j = 0; j < a[i].size(); ++j )
    {
      REQUIRE( std::abs( a[i][j] - b[i][j] ) < 1e-5f );
    }
  }
}

TEST_CASE( "decode keeps the adjacency and checks row counts", "[gnn]" )
{
  auto ps = init_model<float>( small_config(), 4 );
  const auto g = random_aig( 4, 20, 1 );
  const auto before = adjacency_fingerprint( g );
  const auto gt = make_graph_tensors<float>( g, aggregation::sum );
  const sparse_matrix<float> in_before = *gt.in_op;
  tape<float> t;
  auto x = encode( t, ps, gt );
  auto y = decode( t, ps, x, gt );
  CHECK( y.rows() == static_cast<Eigen::Index>( g.size() ) );
  CHECK( adjacency_fingerprint( g ) == before );
  CHECK( ( matrix<float>( *gt.in_op ) - matrix<float>( in_before ) ).isZero() );
  CHECK_THROWS_AS( decode( t, ps, t.constant( matrix<float>::Zero( 3, 16 ) ), gt ), shape_error );
}

TEST_CASE( "mask token receives gradient through the decoder", "[gnn]" )
{
  auto ps = init_model<double>( small_config(), 5 );
  const auto g = random_aig( 4, 20, 2 );
  const auto gt = make_graph_tensors<double>( g, aggregation::sum );
  ps.zero_grad();
  tape<double> t;
  auto x = encode( t, ps, gt );
  auto [xm, sel] = mask_latent( t, ps, x, 0.3, 9 );
  REQUIRE( sel.num_masked() > 0 );
  auto y = decode( t, ps, xm, gt );
  t.backward( sum( predict_degrees( t, ps, y ) ) );
  CHECK( ps.get( "mask_token" ).grad.norm() > 0.0 );
}

TEST_CASE( "latent masking", "[gnn]" )
{
  auto ps = init_model<float>( small_config(), 6 );
  ps.get( "mask_token" ).value.setConstant( 7.0f );
  tape<float> t;
  matrix<float> xm( 10, 16 );
  xm.setRandom();
  auto x = t.constant( xm );

  auto [same, s0] = mask_latent( t, ps, x, 0.0, 1 );
  CHECK( s0.num_masked() == 0 );
  CHECK( same.value() == xm );

  auto [masked, s3] = mask_latent( t, ps, x, 0.3, 1 );
  CHECK( s3.num_masked() == 3 );
  int token_rows = 0;
  for ( Eigen::Index r = 0; r < 10; ++r )
  {
    if ( ( masked.value().row( r ).array() == 7.0f ).all() )
    {
      ++token_rows;
    }
  }
  CHECK( token_rows == 3 );
  for ( auto k : s3.kept )
  {
    CHECK( masked.value().row( k ) == xm.row( k ) );
  }
  CHECK( s3.kept.size() + s3.masked.size() == 10 );

  auto [again, s3b] = mask_latent( t, ps, x, 0.3, 1 );
  CHECK( s3b.masked == s3.masked );
  CHECK_THROWS( mask_latent( t, ps, x, 1.0, 1 ) );
  CHECK_THROWS( mask_latent( t, ps, x, -0.1, 1 ) );
}

TEST_CASE( "mask count is ceil(r N)", "[gnn][property]" )
{
  for ( std::size_t n = 0; n < 60; ++n )
  {
    for ( double r : { 0.1, 0.3, 0.5, 0.7, 0.9 } )
    {
      const auto sel = select_mask( n, r, n );
      // exact rational ceil: r has one decimal digit
      const auto tenths = static_cast<std::size_t>( std::lround( r * 10 ) );
      CHECK( sel.num_masked() == ( tenths * n + 9 ) / 10 );
    }
  }
}

TEST_CASE( "type masking", "[gnn]" )
{
  const auto g = random_aig( 3, 5, 1 );
  const auto [same, s0] = mask_types( g, 0.0, 3 );
  CHECK( same.types == g.types );

  const auto [m8, s8] = mask_types( g, 0.5, 3 );
  CHECK( m8.count( node_type::masked ) == ( g.size() + 1 ) / 2 );
  CHECK( m8.edges == g.edges );
  CHECK( g.count( node_type::masked ) == 0 );

  CHECK_THROWS_AS( write_aiger( m8, aiger_format::ascii ), graph_error );
  auto ps = init_model<float>( small_config(), 7 );
  CHECK( encode_graph( ps, m8 ).rows() == static_cast<Eigen::Index>( m8.size() ) );
  CHECK_THROWS( mask_types( m8, 0.5, 3 ) );
}

TEST_CASE( "type masking of exactly eight nodes", "[gnn]" )
{
  aig_graph g;
  std::vector<node_id> pis;
  for ( int i = 0; i < 3; ++i )
  {
    pis.push_back( g.add_pi() );
  }
  const auto a = g.add_node( node_type::and_gate );
  g.add_edge( pis[0], a );
  g.add_edge( pis[1], a );
  const auto b = g.add_node( node_type::and_gate );
  g.add_edge( a, b );
  g.add_edge( pis[2], b );
  const auto n = g.add_node( node_type::not_gate );
  g.add_edge( b, n );
  g.add_po( n );
  g.add_po( a );
  REQUIRE( g.size() == 8 );
  const auto [m, sel] = mask_types( g, 0.5, 11 );
  CHECK( m.count( node_type::masked ) == 4 );
  CHECK( sel.num_masked() == 4 );
}

TEST_CASE( "cross attention", "[gnn]" )
{
  auto cfg = small_config();
  auto ps = init_model<double>( cfg, 8 );
  tape<double> t;
  matrix<double> xb( 5, 16 );
  xb.setRandom();
  auto x = t.constant( xb );

  matrix<double> one( 1, 8 );
  one.setRandom();
  const auto r1 = cross_attention( t, ps, x, one );
  const matrix<double> vrow = one * ps.get( "attention.w_v" ).value;
  for ( Eigen::Index r = 0; r < 5; ++r )
  {
    CHECK( r1.weights.value()( r, 0 ) == 1.0 );
    CHECK( ( r1.output.value().row( r ) - vrow ).norm() < 1e-12 );
  }
  const auto r3 = cross_attention( t, ps, x, matrix<double>( one * 3.0 ) );
  CHECK( ( r3.output.value() - 3.0 * r1.output.value() ).norm() < 1e-10 );

  matrix<double> xv( 16, 8 );
  xv.setRandom();
  const auto r16 = cross_attention( t, ps, x, xv );
  CHECK( r16.output.rows() == 5 );
  CHECK( r16.output.cols() == 16 );
  for ( Eigen::Index r = 0; r < 5; ++r )
  {
    CHECK( std::abs( r16.weights.value().row( r ).sum() - 1.0 ) < 1e-6 );
  }
  CHECK_THROWS_AS( cross_attention( t, ps, x, matrix<double>( matrix<double>::Zero( 4, 9 ) ) ), shape_error );
  CHECK_THROWS_AS( cross_attention( t, ps, x, matrix<double>( 0, 8 ) ), shape_error );
}

TEST_CASE( "cross attention is permutation equivariant over nodes", "[gnn]" )
{
  auto ps = init_model<double>( small_config(), 9 );
  matrix<double> xb( 6, 16 ), xv( 4, 8 );
  xb.setRandom();
  xv.setRandom();
  std::vector<int> p{ 3, 0, 5, 1, 4, 2 };
  matrix<double> xp( 6, 16 );
  for ( int i = 0; i < 6; ++i )
  {
    xp.row( p[i] ) = xb.row( i );
  }
  tape<double> t;
  const auto a = cross_attention( t, ps, t.constant( xb ), xv ).output.value();
  const auto b = cross_attention( t, ps, t.constant( xp ), xv ).output.value();
  for ( int i = 0; i < 6; ++i )
  {
    CHECK( ( a.row( i ) - b.row( p[i] ) ).norm() < 1e-12 );
  }
}

TEST_CASE( "prediction heads", "[gnn]" )
{
  auto ps = init_model<float>( small_config(), 10 );
  tape<float> t;
  matrix<float> xm( 7, 16 );
  xm.setRandom();
  auto x = t.constant( xm );
  const auto z = predict_types( t, ps, x ).value();
  CHECK( z.cols() == 4 );
  for ( Eigen::Index r = 0; r < 7; ++r )
  {
    CHECK( std::abs( z.row( r ).sum() - 1.0f ) < 1e-6f );
  }
  const auto d = predict_degrees( t, ps, x ).value();
  CHECK( d.rows() == 7 );
  CHECK( d.cols() == 2 );

  ps.get( "head.type.weight" ).value.setZero();
  ps.get( "head.in.weight" ).value.setZero();
  ps.get( "head.out.weight" ).value.setZero();
  const auto zu = predict_types( t, ps, x ).value();
  CHECK( ( zu.array() == 0.25f ).all() );
  CHECK( predict_degrees( t, ps, x ).value().isZero() );
}

TEST_CASE( "labels carry multiplicity-weighted degrees", "[gnn]" )
{
  aig_graph g;
  const auto a = g.add_pi();
  const auto b = g.add_node( node_type::and_gate );
  g.add_edge( a, b, 2 );
  g.add_po( b );
  const auto l = make_labels<float>( g );
  CHECK( l.degrees( 1, 0 ) == 2.0f );
  CHECK( l.degrees( 0, 1 ) == 2.0f );
  CHECK( l.types == std::vector<std::uint32_t>{ 0, 2, 1 } );
  // one message per physical edge
  const auto gt = make_graph_tensors<float>( g, aggregation::sum );
  CHECK( gt.in_op->coeff( 1, 0 ) == 1.0f );
}
