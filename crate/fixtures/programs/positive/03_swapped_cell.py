def solution(table_data):
    col = get_column_by_name(table_data, "Revenue")
    first = get_cell(0, col)
    return first
