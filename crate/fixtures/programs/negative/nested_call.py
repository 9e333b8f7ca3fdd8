def solution(table_data):
    m = max(get_column_by_name(table_data, "x"))
    return m
