def solution(table_data):
    a = count(table_data)
    a = add(a, 1)
    return a
