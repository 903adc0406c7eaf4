use super::*;
use crate::fixtures::schema;
use crate::schema::TableDef;
use crate::sqlast::{normalize_sql, parse_sql, print_sql, token_count};

fn lower_text(sql: &str, db: &str) -> String {
    let s = schema(db);
    print_ssql(
        &lower_to_ssql(&parse_sql(sql, &s).unwrap(), &s).unwrap(),
        &s,
    )
}

fn lift_text(ssql: &str, db: &str) -> String {
    let s = schema(db);
    print_sql(
        &lift_to_sql(&parse_ssql(ssql, &s).unwrap(), &s).unwrap(),
        &s,
    )
}

const THREE_WAY: &str = "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.singer_id = T2.singer_id JOIN concert AS T3 ON T2.concert_id = T3.concert_id WHERE T3.year = 2014";

#[test]
fn lowering_drops_connector_tables() {
    assert_eq!(
        lower_text(THREE_WAY, "concert_singer"),
        "select singer.name from singer , concert where concert.year = 2014"
    );
}

#[test]
fn lifting_restores_the_junction() {
    assert_eq!(
        lift_text(
            "select singer.name from singer , concert where concert.year = 2014",
            "concert_singer"
        ),
        "select t1.name from singer as t1 join singer_in_concert as t2 on t1.singer_id = t2.singer_id join concert as t3 on t2.concert_id = t3.concert_id where t3.year = 2014"
    );
}

#[test]
fn single_table_is_unchanged_apart_from_fusing() {
    assert_eq!(
        lower_text(
            "SELECT count(*) FROM singer WHERE age > 20",
            "concert_singer"
        ),
        "select count(*) from singer where singer.age > 20"
    );
    assert_eq!(
        lift_text(
            "select count(*) from singer where singer.age > 20",
            "concert_singer"
        ),
        "select count(*) from singer where age > 20"
    );
}

#[test]
fn count_over_join_keeps_all_tables() {
    assert_eq!(
        lower_text(
            "SELECT count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id",
            "concert_singer"
        ),
        "select count(*) from stadium , concert"
    );
}

#[test]
fn nested_blocks_lower_and_lift_independently() {
    let sql = "SELECT name FROM stadium WHERE stadium_id NOT IN (SELECT stadium_id FROM concert)";
    let ssql = lower_text(sql, "concert_singer");
    assert_eq!(
        ssql,
        "select stadium.name from stadium where stadium.stadium_id not in (select concert.stadium_id from concert)"
    );
    assert_eq!(
        lift_text(&ssql, "concert_singer"),
        "select name from stadium where stadium_id not in (select stadium_id from concert)"
    );
}

#[test]
fn correlated_reference_stays_outer() {
    let s = schema("concert_singer");
    let sql = "SELECT name FROM singer AS s WHERE age > (SELECT avg(age) FROM singer_in_concert AS x WHERE x.singer_id = s.singer_id)";
    let gold = parse_sql(sql, &s).unwrap();
    let lowered = lower_to_ssql(&gold, &s).unwrap();
    let lifted = lift_to_sql(&lowered, &s).unwrap();
    assert_eq!(normalize_sql(&lifted), normalize_sql(&gold));
}

#[test]
fn missing_table_in_from_is_pulled_in() {
    assert_eq!(
        lift_text("select singer.name from concert where concert.year = 2014", "concert_singer"),
        "select t1.name from singer as t1 join singer_in_concert as t2 on t1.singer_id = t2.singer_id join concert as t3 on t2.concert_id = t3.concert_id where t3.year = 2014"
    );
}

#[test]
fn self_join_is_rejected() {
    let s = schema("network_1");
    let q = parse_sql(
        "SELECT T3.name FROM Highschooler AS T1 JOIN Friend AS T2 ON T1.id = T2.student_id JOIN Highschooler AS T3 ON T2.friend_id = T3.id WHERE T1.name = 'Kyle'",
        &s,
    )
    .unwrap();
    assert!(matches!(
        lower_to_ssql(&q, &s),
        Err(LowerError::UnsupportedSelfJoin { table }) if table == "Highschooler"
    ));
}

#[test]
fn fused_token_errors() {
    let s = schema("concert_singer");
    assert!(matches!(
        parse_ssql("select nosuch.name from nosuch", &s),
        Err(SsqlError::UnknownFusedToken { token, .. }) if token == "nosuch.name"
    ));
    assert!(matches!(
        parse_ssql("select name from singer", &s),
        Err(SsqlError::UnknownFusedToken { .. })
    ));
    assert!(matches!(
        parse_ssql("select singer.name from singer join concert", &s),
        Err(SsqlError::Syntax(_))
    ));
}

#[test]
fn ssql_from_is_schema_ordered() {
    let s = schema("concert_singer");
    let q = parse_ssql("select singer.name from concert , singer , concert", &s).unwrap();
    assert_eq!(
        print_ssql(&q, &s),
        "select singer.name from singer , concert"
    );
}

#[test]
fn disconnected_tables_fail_to_lift() {
    let s = Schema::new(
        "db",
        vec![
            TableDef::untyped("a", &["x"]),
            TableDef::untyped("b", &["y"]),
        ],
        vec![],
        vec![],
    )
    .unwrap();
    let q = parse_ssql("select a.x , b.y from a , b", &s).unwrap();
    assert!(matches!(
        lift_to_sql(&q, &s),
        Err(LiftError::Disconnected { .. })
    ));
}

#[test]
fn lowering_shortens_join_queries() {
    let s = schema("concert_singer");
    let gold = parse_sql(THREE_WAY, &s).unwrap();
    let sql = print_sql(&gold, &s);
    let ssql = print_ssql(&lower_to_ssql(&gold, &s).unwrap(), &s);
    assert!(token_count(&ssql) < token_count(&sql));
}

#[test]
fn roundtrip_through_text() {
    for (db, sql) in [
        ("concert_singer", THREE_WAY),
        ("concert_singer", "SELECT T2.name , count(*) FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id GROUP BY T1.stadium_id"),
        ("pets_1", "SELECT T1.fname FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid JOIN pets AS T3 ON T3.petid = T2.petid WHERE T3.pettype = 'cat' INTERSECT SELECT T1.fname FROM student AS T1 JOIN has_pet AS T2 ON T1.stuid = T2.stuid JOIN pets AS T3 ON T3.petid = T2.petid WHERE T3.pettype = 'dog'"),
        ("employee_hire_evaluation", "SELECT t1.name FROM employee AS t1 JOIN evaluation AS t2 ON t1.Employee_ID = t2.Employee_ID ORDER BY t2.bonus DESC LIMIT 1"),
        ("concert_singer", "SELECT count(*) FROM (SELECT name FROM singer UNION SELECT name FROM stadium)"),
    ] {
        let s = schema(db);
        let gold = parse_sql(sql, &s).unwrap();
        let text = print_ssql(&lower_to_ssql(&gold, &s).unwrap(), &s);
        let lifted = lift_to_sql(&parse_ssql(&text, &s).unwrap(), &s).unwrap();
        assert_eq!(normalize_sql(&lifted), normalize_sql(&gold), "{sql}\n{text}");
    }
}
