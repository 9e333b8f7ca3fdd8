def solution(table_data):
    rows = filter_rows(
        table_data,
        "Floor",
        3,
    )
    n = count(rows)
    return n
