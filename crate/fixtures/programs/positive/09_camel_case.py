def solution(table_data):
    col = getColumnByName(table_data, "Cost")
    biggest = max(col)
    half = divide(biggest, 2)
    return half
