def solution(table_data):
    total = get_column_by_name(table_data, "x")
    for v in total:
        print(v)
    return total
