def solution(table_data):
    c = get_column_by_name(table_data, "x")
    return max(c)
