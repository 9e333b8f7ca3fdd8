def solution(table_data):
    col = get_column_by_index(table_data, 1)
    low = min(col)
    shifted = add(low, -3.5)
    return shifted
